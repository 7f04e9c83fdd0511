"""Both kernel backends must agree bit for bit, ties included."""

import random

import numpy as np
import pytest

from oracles import enumerate_spans
from spanalign._kernels import BACKEND, BEAD_ORDER, _pykernels

_ckernels = pytest.importorskip(
    "spanalign._kernels._ckernels", reason="compiled extension not built"
)


def random_probs(rng, n, quantize=None):
    v = [rng.random() for _ in range(n)]
    if quantize:
        v = [round(x, quantize) for x in v]
    if rng.random() < 0.3:
        v[rng.randrange(n)] = 0.0
    return np.array(v)


def test_backend_is_compiled():
    # the build installs the extension; the env override is tested below
    assert BACKEND in ("c", "python")


def test_pure_python_env_override():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "from spanalign._kernels import BACKEND; print(BACKEND)"],
        capture_output=True,
        text=True,
        env={"SPANALIGN_PURE_PYTHON": "1", "PATH": "/usr/bin:/bin"},
    )
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("quantize", [None, 1])
def test_best_span_backends_agree(quantize):
    rng = random.Random(61 if quantize else 60)
    for _ in range(200):
        n = rng.randint(1, 40)
        p1, p2 = random_probs(rng, n, quantize), random_probs(rng, n, quantize)
        assert _pykernels.best_span_kernel(p1, p2) == _ckernels.best_span_kernel(p1, p2)


@pytest.mark.parametrize("quantize", [None, 1])
def test_top_k_backends_agree(quantize):
    rng = random.Random(71 if quantize else 70)
    for _ in range(150):
        n = rng.randint(1, 25)
        k = rng.randint(1, n * (n + 1) // 2 + 3)
        p1, p2 = random_probs(rng, n, quantize), random_probs(rng, n, quantize)
        py = _pykernels.top_k_spans_kernel(p1, p2, k)
        cx = _ckernels.top_k_spans_kernel(p1, p2, k)
        for a, b in zip(py, cx):
            np.testing.assert_array_equal(a, b)


def test_best_span_matches_oracle_with_ties():
    rng = random.Random(80)
    for _ in range(150):
        n = rng.randint(1, 12)
        # single-decimal probabilities force plenty of exact ties
        p1, p2 = random_probs(rng, n, 1), random_probs(rng, n, 1)
        want = enumerate_spans(p1.tolist(), p2.tolist())[0]
        assert _ckernels.best_span_kernel(p1, p2) == want
        assert _pykernels.best_span_kernel(p1, p2) == want


def random_dp_instance(rng, quantize=None):
    n, m = rng.randint(1, 6), rng.randint(1, 6)
    def table():
        t = np.array([[rng.random() for _ in range(m)] for _ in range(n)])
        return np.round(t, quantize) if quantize else t
    pen = np.array([0.0, 0.25, 0.25, 0.05, 0.05, 0.10])
    return n, m, table(), table(), table(), table(), pen


@pytest.mark.parametrize("quantize", [None, 1])
def test_dp_backends_agree(quantize):
    rng = random.Random(90 if quantize else 91)
    for _ in range(200):
        n, m, s11, s12, s21, s22, pen = random_dp_instance(rng, quantize)
        py_obj, py_choice = _pykernels.dp_solve_kernel(s11, s12, s21, s22, pen)
        cx_obj, cx_choice = _ckernels.dp_solve_kernel(s11, s12, s21, s22, pen)
        assert py_obj == cx_obj
        np.testing.assert_array_equal(np.asarray(py_choice), np.asarray(cx_choice))


def test_bead_order_is_the_contract():
    # 1-1 preferred, then beads consuming fewer source sentences
    assert BEAD_ORDER[0] == (1, 1)
    src_counts = [b[0] for b in BEAD_ORDER[1:]]
    assert src_counts == sorted(src_counts)
