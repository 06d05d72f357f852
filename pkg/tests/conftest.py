import numpy as np
import pytest

from parkwatch.ingest import GateKind, GateNode, PreserveMap


@pytest.fixture
def tiny_map() -> PreserveMap:
    """Six-gate map, one of each kind, on a 200x200 grid."""
    gates = (
        GateNode("camp-a", GateKind.CAMPING, 120, 90),
        GateNode("entry-e", GateKind.ENTRANCE, 10, 100),
        GateNode("entry-w", GateKind.ENTRANCE, 190, 100),
        GateNode("gate-x", GateKind.GATE, 100, 60),
        GateNode("general-g", GateKind.GENERAL_GATE, 80, 110),
        GateNode("rbase", GateKind.RANGER_BASE, 50, 50),
        GateNode("rstop", GateKind.RANGER_STOP, 150, 150),
    )
    return PreserveMap(200, 200, gates, np.zeros((200, 200), dtype=bool))
