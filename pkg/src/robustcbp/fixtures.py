"""Embedded datasets and reference values for the reproduction targets.

The simulated trajectory is stored as rows ``z phi Z(0) ... Z(14)``, one per
generation; sufficient statistics are always recomputed from it.
"""

from __future__ import annotations

import hashlib
import json

from .branching import FamilyTree, Generation
from .errors import ConfigError

SIM45_TABLE = """\
1 1 0 0 0 0 0 0 0 0 1 0 0 0 0 0 0
8 4 1 0 0 1 0 0 0 0 1 0 0 1 0 0 0
22 5 2 1 0 0 1 0 0 0 0 0 0 1 0 0 0
16 3 0 0 0 0 0 0 1 0 0 0 0 2 0 0 0
28 3 2 0 0 0 1 0 0 0 0 0 0 0 0 0 0
4 1 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0
11 2 0 1 0 1 0 0 0 0 0 0 0 0 0 0 0
4 3 0 1 1 0 0 0 0 0 1 0 0 0 0 0 0
11 4 1 0 1 2 0 0 0 0 0 0 0 0 0 0 0
8 3 0 1 1 0 0 0 0 0 0 0 0 1 0 0 0
14 3 1 0 1 1 0 0 0 0 0 0 0 0 0 0 0
5 1 0 1 0 0 0 0 0 0 0 0 0 0 0 0 0
1 1 0 0 0 0 0 0 0 0 0 0 0 1 0 0 0
11 3 1 0 1 0 0 0 0 0 0 0 1 0 0 0 0
12 5 1 2 0 0 1 0 0 0 0 0 0 1 0 0 0
17 6 0 2 1 0 0 1 0 1 0 0 0 1 0 0 0
27 10 3 3 2 0 0 0 0 0 0 0 0 2 0 0 0
29 6 1 2 1 0 1 0 0 1 0 0 0 0 0 0 0
15 5 1 1 1 1 0 0 0 0 0 0 0 1 0 0 0
17 6 1 1 2 0 1 1 0 0 0 0 0 0 0 0 0
14 8 2 4 1 0 0 0 0 0 0 0 0 1 0 0 0
17 4 1 0 2 0 0 0 0 0 0 0 0 1 0 0 0
15 2 0 0 1 0 0 0 0 0 0 0 0 1 0 0 0
13 4 2 0 1 0 0 0 0 0 0 0 0 1 0 0 0
13 2 0 1 0 0 0 0 0 0 0 0 0 1 0 0 0
12 3 1 0 1 0 0 0 0 0 0 1 0 0 0 0 0
11 4 0 0 0 1 1 0 0 0 1 0 0 1 0 0 0
26 9 2 2 2 0 1 0 0 0 0 0 1 1 0 0 0
31 7 2 1 1 0 0 0 0 0 0 0 0 3 0 0 0
36 9 3 2 0 1 2 0 1 0 0 0 0 0 0 0 0
19 6 1 1 1 1 1 0 0 0 0 0 0 1 0 0 0
21 5 1 0 1 2 1 0 0 0 0 0 0 0 0 0 0
12 4 1 0 0 1 1 0 0 0 0 0 0 1 0 0 0
18 6 2 0 3 0 0 0 0 0 0 0 0 1 0 0 0
17 8 1 0 1 1 1 1 0 0 0 0 0 3 0 0 0
47 16 6 2 2 2 0 0 0 0 1 0 0 3 0 0 0
53 18 8 1 4 3 0 0 1 0 1 0 0 0 0 0 0
32 12 1 2 1 1 4 0 1 1 0 0 0 1 0 0 0
47 16 7 3 1 0 2 1 0 0 0 0 0 1 0 0 1
43 15 5 4 3 1 0 0 0 0 1 0 0 1 0 0 0
32 14 5 3 0 3 0 1 0 0 0 0 0 2 0 0 0
39 13 4 2 3 0 1 2 0 0 0 0 1 0 0 0 0
32 10 3 1 2 0 0 0 0 0 0 0 1 3 0 0 0
48 18 4 2 2 0 0 2 3 0 1 0 0 4 0 0 0
86 20 7 3 6 2 1 0 0 0 0 0 0 0 0 0 1
"""

# Oligodendrocyte experiments: counts over n generations from z0 type-1 cells.
OLIGO = {
    "oligo-exp1": dict(n=7, z0=34, y1_total=425, delta=410, y1_0=158, y1_2=201, psi=51),
    "oligo-exp2": dict(n=5, z0=30, y1_total=276, delta=269, y1_0=37, y1_2=133, psi=99),
}

SIM45_SETUP = dict(theta0=0.3, rate=0.3, z0=1, alpha=0.15, point=11)

# The NED values reported for the simulated trajectory are reproduced by a
# sum over k = 0..16 without tail term; see README.
SIM45_NED_SUPPORT_MAX = 16

FIXTURE_IDS = ("oligo-exp1", "oligo-exp2", "sim-geo45")

CHECKSUMS = {
    "oligo-exp1": "48c57411dc5c006099cc736efdb50dead9175b6a617b1b0a30bf9d2916c9cdbc",
    "oligo-exp2": "9b55744cd27098b494e3b058c2211a090530bbf4ce672192a5fe471389517355",
    "sim-geo45": "d4a9e0db67f25c4f7287aba1265072dc8ca22f1c439b3b7fadd1eab9e10363ca",
}


def sim45_tree() -> FamilyTree:
    gens = []
    for line in SIM45_TABLE.strip().splitlines():
        z, phi, *counts = (int(v) for v in line.split())
        gens.append(Generation(z, phi, {k: c for k, c in enumerate(counts) if c}))
    return FamilyTree(1, tuple(gens))


def load_fixture(fixture_id: str):
    """Return a FamilyTree (``sim-geo45``) or TwoTypeStats (``oligo-*``)."""
    if fixture_id == "sim-geo45":
        return sim45_tree()
    if fixture_id in OLIGO:
        from .multitype import TwoTypeStats
        return TwoTypeStats(**OLIGO[fixture_id])
    raise ConfigError(f"unknown fixture {fixture_id!r}; choose from {', '.join(FIXTURE_IDS)}")


def fixture_payload(fixture_id: str) -> dict:
    if fixture_id == "sim-geo45":
        return sim45_tree().to_dict()
    if fixture_id in OLIGO:
        return dict(OLIGO[fixture_id])
    raise ConfigError(f"unknown fixture {fixture_id!r}")


def fixture_checksum(fixture_id: str) -> str:
    blob = json.dumps(fixture_payload(fixture_id), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# Reference values -----------------------------------------------------------

TABLE2 = {
    "oligo-exp1": (0.3854, 0.4902, 0.1244, 0.9647),
    "oligo-exp2": (0.1375, 0.4944, 0.3680, 0.9746),
}

# (kind -> (EDAP triple, MDAP triple))
TABLE3 = {
    "HD": ((0.3858, 0.4895, 0.1247), (0.3850, 0.4910, 0.1240)),
    "NED": ((0.3852, 0.4897, 0.1251), (0.3850, 0.4910, 0.1240)),
    "KL": ((0.3853, 0.4893, 0.1254), (0.3850, 0.4910, 0.1240)),
}
TABLE4 = {
    "HD": ((0.1380, 0.4939, 0.3680), (0.1360, 0.4960, 0.3680)),
    "NED": ((0.1388, 0.4935, 0.3677), (0.1360, 0.4960, 0.3680)),
    "KL": ((0.1386, 0.4934, 0.3681), (0.1360, 0.4960, 0.3680)),
}
TABLE5 = {
    "oligo-exp1": {"HD": 0.3424, "NED": 0.3382, "KL": 0.3380},
    "oligo-exp2": {"HD": 0.4234, "NED": 0.4177, "KL": 0.4174},
}

# rho, beta, prior mean, prior var, EDAP HD, EDAP NED, MDAP HD, MDAP NED
TABLE6 = (
    (0.1, 5.0, 0.020, 0.003, 0.294, 0.292, 0.294, 0.291),
    (0.1, 1.0, 0.091, 0.039, 0.296, 0.294, 0.295, 0.293),
    (2.0, 5.0, 0.286, 0.026, 0.296, 0.294, 0.295, 0.293),
    (1.0, 2.0, 0.333, 0.056, 0.296, 0.295, 0.295, 0.294),
    (0.1, 0.1, 0.500, 0.208, 0.296, 0.295, 0.295, 0.293),
    (2.5, 2.5, 0.500, 0.042, 0.297, 0.296, 0.296, 0.295),
    (2.0, 1.0, 0.667, 0.056, 0.297, 0.297, 0.296, 0.295),
    (5.0, 2.0, 0.714, 0.026, 0.299, 0.300, 0.298, 0.299),
    (1.0, 0.1, 0.909, 0.039, 0.296, 0.296, 0.296, 0.295),
    (5.0, 0.1, 0.980, 0.003, 0.299, 0.301, 0.298, 0.300),
)

# Beta(1/2, 1/2) prior at n = 45: EDAP HD, MDAP HD, EDAP NED, MDAP NED
SIM45 = {"EDAP_HD": 0.2962, "MDAP_HD": 0.2953, "EDAP_NED": 0.2953, "MDAP_NED": 0.2940}
