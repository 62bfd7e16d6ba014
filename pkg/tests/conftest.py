import pytest

from hqa.mip import MipInstance
from hqa.model import HybridProblemSpec


@pytest.fixture
def paper_instance() -> MipInstance:
    """Two-line production planning instance used across the suite."""
    return MipInstance(
        required_total=2.0,
        investment_cost=(1.0, 2.0),
        unit_cost=(2.1, 2.2),
        cost_reduction=(1.8, 2.0),
        quadratic_cost=(3.3, 3.8),
        penalty_weight=15.0,
    )


@pytest.fixture
def appendix_spec() -> HybridProblemSpec:
    """Single qubit-resonator pair with a fast drive, for frame comparisons."""
    return HybridProblemSpec(
        qubit_bias=[153.7],
        resonator_freq=[154.1],
        number_coupling=[[0.15]],
        displacement_coupling=[[0.25]],
        displacement_drive=[0.30],
        transverse_field=[0.55],
        field_freq=153.9,
    )
