"""
Does accuracy depend on the subject's age and weight?
=====================================================

Evaluate a cohort of short synthetic sessions, then regress each metric on
[1, age, weight, age*weight] and test the fit with an overall F-test. The
synthetic subjects' profiles have no influence on the signals, so a large
p-value is expected.
"""

from dataclasses import replace

from ppg2ecg import PipelineConfig, SynthConfig, generate
from ppg2ecg.evaluation import aggregate, evaluate_session, profile_regression

base = SynthConfig(duration_s=120.0, ppg_delay=45, noise_std=0.05)
metrics = []
for i in range(12):
    session, _ = generate(replace(base, seed=100 + i, session_id=f"subject_{i:02d}"))
    metrics.append(evaluate_session(session, PipelineConfig()))

agg = aggregate(metrics)
print(f"n = {agg['n']}")
print(f"rho   {agg['rho']['mean']:.4f} +/- {agg['rho']['std']:.4f}")
print(f"rRMSE {agg['rrmse']['mean']:.4f} +/- {agg['rrmse']['std']:.4f}")

for name in ("rho", "rrmse"):
    res = profile_regression((m.age, m.weight, getattr(m, name)) for m in metrics)
    print(f"{name:5s} R^2 = {res.r_squared:.3f}, F = {res.f_statistic:.3f}, p = {res.p_value:.3f}")
