import pytest

from robustcbp.errors import ConfigError
from robustcbp.fixtures import CHECKSUMS, FIXTURE_IDS, fixture_checksum, load_fixture
from robustcbp.reproduce import reproduce


@pytest.mark.parametrize("fid", FIXTURE_IDS)
def test_checksum_pinned(fid):
    assert fixture_checksum(fid) == CHECKSUMS[fid]


def test_unknown_fixture():
    with pytest.raises(ConfigError):
        load_fixture("oligo-exp3")


def test_table2_exact():
    cells = reproduce("table2")
    assert all(c.passed for c in cells)
    # rounding the exact ratios must give the reference digits, not merely come close
    assert all(round(c.computed, 4) == c.reference for c in cells)
