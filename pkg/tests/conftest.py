import math

import pytest

from ppto import ChannelParams


@pytest.fixture
def a4():
    """ChannelParams factory on the canonical alpha=4, r0=1 setting."""

    def make(density: float, log_base: float = math.e) -> ChannelParams:
        return ChannelParams(alpha=4.0, r0=1.0, density=density, log_base=log_base)

    return make
