"""Bundled reference data: a classically calibrated six-port metasurface.

The matrix below was measured on a fabricated silicon metasurface with three
interleaved gratings (six output ports) using classical light at the
operating wavelength; rows are the port projective bras in the H/V basis,
in arbitrary overall units with a free phase per row. It drives the demo
pipelines and the regression tests.
"""

import numpy as np

from .simulate import TransferMatrix

_SIX_PORT_ROWS = np.array([
    [1.0000 + 0.0000j, -0.3227 - 0.7070j],
    [1.2022 + 0.2874j, 0.6484 + 0.0000j],
    [0.1781 + 0.1282j, 0.7935 + 0.0000j],
    [-0.2692 - 0.8502j, 0.2683 + 0.0000j],
    [-0.6830 + 0.0063j, 0.8625 + 0.0000j],
    [0.1971 - 0.5392j, 1.1189 + 0.0000j],
])


def calibrated_six_port():
    """Transfer matrix of the calibrated six-port device (rows = port bras)."""
    return TransferMatrix(_SIX_PORT_ROWS.copy())
