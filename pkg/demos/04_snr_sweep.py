"""Small Monte Carlo sweep over SNR using a bundled configuration.

The bundled file asks for 100 trials per point; 20 keeps this quick.
Pass a larger number as the first argument for smoother curves.
"""
import sys

from jointdoa import run_sweep
from jointdoa.config import bundled_config, load

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 20
spec = load(bundled_config("snr_sweep.json"), trials=trials).sweep_spec()
result = run_sweep(spec, progress=lambda i, n, v: print(f"  {v:g} dB done ({i}/{n})"))
print(result.to_csv())
