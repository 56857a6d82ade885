import os
import subprocess
import sys

import numpy as np
import pytest

from loopcalc import _kernels_py, fixtures, kernels

compiled = pytest.importorskip("loopcalc._kernels")


@pytest.mark.parametrize("seed", range(6))
def test_backends_agree_bit_for_bit(seed):
    m = fixtures.random_model(seed, q_choices=(2, 3))
    assert kernels.partition_sum(m, compiled) == kernels.partition_sum(m, _kernels_py)
    assert np.array_equal(kernels.config_weights(m, compiled),
                          kernels.config_weights(m, _kernels_py))


def test_marginal_sums_agree():
    m = fixtures.k4(3, 7)
    z1, e1, v1 = kernels.marginal_sums(m, compiled)
    z2, e2, v2 = kernels.marginal_sums(m, _kernels_py)
    assert z1 == z2
    for e in e1:
        np.testing.assert_allclose(e1[e], e2[e], rtol=1e-13)
    for a in v1:
        np.testing.assert_allclose(v1[a], v2[a], rtol=1e-13)


def test_fallback_crosses_chunk_boundary():
    # 2^18 configurations spans several fallback chunks
    m = fixtures.from_edges(2, [(f"v{i}", f"v{i + 1}") for i in range(18)], seed=5)
    assert m.n_configs > _kernels_py.CHUNK
    assert kernels.partition_sum(m, compiled) == kernels.partition_sum(m, _kernels_py)


def test_edgeless_model():
    m = fixtures.from_edges(2, [], vertices=["a"], tables={"a": [2.5]})
    assert kernels.partition_sum(m) == 2.5


def test_env_forces_fallback():
    out = subprocess.run(
        [sys.executable, "-c", "from loopcalc import kernels; print(kernels.BACKEND)"],
        env={**os.environ, "LOOPCALC_PURE_PYTHON": "1"},
        capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    if os.environ.get("LOOPCALC_PURE_PYTHON") != "1":
        assert kernels.BACKEND == "cython"
