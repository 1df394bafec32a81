import math
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from foldkit.model import BandSpec, HingeSpec, JointConfig  # noqa: E402

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

YELLOW_REST = 0.9 * math.pi * 0.012 / 2


def stiff_hinge(k_h: float = 0.16) -> HingeSpec:
    """Hinge with W=30 mm, t=0.4 mm, L_hinge=2 mm, scaled by E to the given stiffness."""
    return HingeSpec(0.4e-3, 30e-3, 2e-3, young_modulus=2e9 * k_h / 0.16)


def yellow(k_b: float = 100.0) -> BandSpec:
    return BandSpec(0.012, k_b, 0.9, "yellow")


@pytest.fixture
def worked_joint() -> JointConfig:
    return JointConfig(stiff_hinge(), yellow(), 0.030)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
