from hypothesis import HealthCheck, settings

# reproducible runs: same examples every time, no wall-clock flakiness
settings.register_profile(
    "deterministic",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")
