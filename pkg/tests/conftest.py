import pytest

from mcrx.workbench.config import parse_config

TINY_CONFIG = """\
# small GFDM setup for fast end-to-end runs
waveform.kind = GFDM
waveform.K = 4
waveform.M = 3
waveform.ncp = 3
waveform.rolloff = 0.1
channel.profile = uniform
channel.ntaps = 3
sweep.start = 0
sweep.stop = 8
sweep.step = 4
data.train_symbols = 300
data.test_symbols = 200
train.epochs = 3
train.lr = 0.003
seed = 11
"""


@pytest.fixture
def tiny_text():
    return TINY_CONFIG


@pytest.fixture
def tiny_cfg():
    return parse_config(TINY_CONFIG)


@pytest.fixture
def tiny_file(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_CONFIG)
    return str(path)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
