"""
How many PPG coefficients does the map need?
============================================

The synthetic coupling only uses the first 8 PPG DCT coefficients, so test
accuracy should stop improving once L_x reaches about 8. The session is
preprocessed once and every grid value reuses the same cycles.
"""

from ppg2ecg import SynthConfig, generate, sweep_lx

session, truth = generate(SynthConfig(seed=1, ppg_delay=60))
print(f"true coupling uses {truth.F_true.shape[0]} PPG coefficients")

print(" L_x    rho     rRMSE")
for l_x, m in sweep_lx(session, [2, 4, 6, 8, 10, 12, 16, 20, 30, 40]):
    print(f"{l_x:4d}  {m.rho:.4f}  {m.rrmse:.4f}")
