"""Shared test configuration."""

from hypothesis import HealthCheck, settings

# Property tests here exercise numerical code whose per-example cost varies
# widely with the drawn parameters; a modest example budget with no deadline
# keeps the suite deterministic across machines.
settings.register_profile(
    "fuplab",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("fuplab")
