import pytest
from hypothesis import settings

settings.register_profile("ci", max_examples=50, deadline=None)
settings.load_profile("ci")


class RunCache:
    """Each (scenario, column) pair is simulated once per session; the
    acceptance criteria share runs heavily."""

    def __init__(self):
        self._runs = {}

    def get(self, scenario, column, options=None, params=None):
        from abrsim.scenarios import Sim, build
        from abrsim.switches import PRESETS

        key = (scenario, column)
        if key not in self._runs:
            if options is None and column != "nonvsvd":
                options = PRESETS[column]
            sc = build(scenario)
            sim = Sim(sc, options, column, params)
            series = sim.run()
            self._runs[key] = (sim, series, sim.metrics(series))
        return self._runs[key]


@pytest.fixture(scope="session")
def runs():
    return RunCache()
