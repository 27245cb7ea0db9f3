import os
import subprocess
import sys

import numpy as np
import pytest

from compass_ft import _pure, kernels


def backend_in_subprocess(env_value):
    env = dict(os.environ)
    env.pop("COMPASS_FT_PURE_PYTHON", None)
    if env_value is not None:
        env["COMPASS_FT_PURE_PYTHON"] = env_value
    out = subprocess.run([sys.executable, "-c", "from compass_ft import BACKEND; print(BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    return out.stdout.strip()


def test_env_var_forces_pure_backend():
    assert backend_in_subprocess("1") == "python"


def test_default_backend_is_compiled_when_built():
    try:
        import compass_ft._ufcore  # noqa: F401
    except ImportError:
        pytest.skip("extension not built")
    assert backend_in_subprocess(None) == "cython"


def test_matching_dp_empty():
    for impl in (_pure, kernels):
        cost, mate = impl.matching_dp(np.zeros((0, 0)), np.zeros(0))
        assert cost == 0.0 and len(mate) == 0


def test_reusable_decoder_matches_one_shot():
    from .conftest import random_graph
    rng = np.random.default_rng(11)
    g = random_graph(rng, 20, 20)
    indptr, adj = g.adjacency()
    for impl in (_pure, kernels):
        dec = impl.make_decoder(indptr, adj, g.eu, g.ev, g.weight, g.is_boundary())
        for _ in range(20):
            d = np.sort(rng.choice(20, int(rng.integers(1, 7)), replace=False))
            a = dec.decode(d)
            b = impl.uf_decode(indptr, adj, g.eu, g.ev, g.weight, g.is_boundary(), d, 0.0, False)
            assert np.array_equal(a[0], b[0])
