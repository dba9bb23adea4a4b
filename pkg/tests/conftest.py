import os

from hypothesis import HealthCheck, settings

# numerical examples are slow and must be reproducible run to run
settings.register_profile("default", deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))
