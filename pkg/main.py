# Imports ----------------------------------------------------------------------
import logging
from pathlib import Path
from gcapacity.analysis.capacity import CapacityParams
from gcapacity.simulation.control_mc import McConfig
from gcapacity.system.verifier import ThreeWayVerifier, NonQuasiContinuityDemo
# ______________________________________________________________________________

# Variables --------------------------------------------------------------------

# the two barriers b < 0 < l of the event {B_T in {b, l}}
BARRIERS = (-1.0, 1.0)

# upper volatility and time horizon (the lower volatility is 0)
SIGMA_BAR = 1.0
HORIZON_T = 1.0

# spatial step of the G-heat equation grid
DX = 5e-3

# Monte Carlo settings for the bang-bang strategy
MC_CONFIG = McConfig(n_paths=200_000, dt=1e-3, seed=20_240_917, bridge_correction=True)

# centre of the tents h_n in the non-quasi-continuity demo
X0 = 1.0

# the output directory where the reports will be stored as json files
OUTPUT_DIR = Path("./output")

# verbose mode
VERBOSE = True
# ______________________________________________________________________________

# Main -------------------------------------------------------------------------

logging.basicConfig(level=logging.INFO)
OUTPUT_DIR.mkdir(exist_ok=True)

params = CapacityParams(sigma_bar=SIGMA_BAR, horizon_T=HORIZON_T)

# cross-validate the closed-form two-point capacity
verifier = ThreeWayVerifier(*BARRIERS, params=params, dx=DX, mc_config=MC_CONFIG,
                            verbose=VERBOSE)
verify_report = verifier.run()
verify_report.to_json(OUTPUT_DIR / "verify.json")
print(verify_report.render())

# the strictly positive limit behind the non-quasi-continuity of I_{x0}(B_T)
demo = NonQuasiContinuityDemo(X0, params=params, dx=DX, verbose=VERBOSE)
demo_report = demo.run()
demo_report.to_json(OUTPUT_DIR / "demo_nonqc.json")
print(demo_report.render())
