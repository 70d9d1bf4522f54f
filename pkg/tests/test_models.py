import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperalg.errors import DensityUnderflowWarning, ModelError, SpaceError
from hyperalg.models import (
    MODELS,
    SBC,
    SBDR,
    Permutation,
    PermutationSpec,
    Tensor2,
    block_argmax,
    cdt,
    circular_convolve,
    conj_disj_bind,
    depth_for_density,
    discretize_phases,
    disjunction,
    make_model,
    tpr_unbinding_vectors,
)
from hyperalg.spaces import RngStream, similarity

seeds = st.integers(min_value=0, max_value=2**32 - 1)
FAST = settings(max_examples=25, deadline=None)


def direct_conv(a, b):
    D = len(a)
    return np.array([sum(b[k] * a[(j - k) % D] for k in range(D)) for j in range(D)])


def test_factory():
    assert set(MODELS) == {"bsc", "map", "hrr", "fhrr", "sbdr", "sbc", "mcr", "cgr", "mbat", "tpr2"}
    assert make_model("MAP", 64).name == "map"
    with pytest.raises(ModelError):
        make_model("nope", 64)
    with pytest.raises(ModelError):
        make_model("map", 64, r=3)


@pytest.mark.parametrize("name", ["bsc", "map", "hrr", "fhrr", "mcr", "cgr", "sbc"])
def test_identity_element(name):
    m = make_model(name, 64)
    x = m.random(RngStream(1, name))
    assert m.bind(m.identity(), x).equals(x, tol=1e-9)


@pytest.mark.parametrize("name", ["bsc", "map", "hrr", "fhrr", "mcr", "cgr", "sbc"])
def test_bind_is_commutative_and_dissimilar(name):
    m = make_model(name, 2048)
    x, y = (m.random(RngStream(2, f"{name}/{k}")) for k in "xy")
    xy = m.bind(x, y)
    assert xy.equals(m.bind(y, x), tol=1e-9)
    if name == "sbc":
        return
    # the bound vector is quasi-orthogonal to both inputs
    s = m.similarity(xy, x, metric="cosine" if name not in ("bsc", "fhrr") else None)
    if name == "bsc":
        assert 0.45 < s < 0.55
    else:
        assert abs(s) < 0.1


@pytest.mark.parametrize("name", ["bsc", "map", "hrr", "fhrr", "mcr", "cgr"])
def test_superposition_is_similar_to_inputs(name):
    m = make_model(name, 2048)
    xs = [m.random(RngStream(3, f"{name}/{k}")) for k in range(5)]
    other = m.random(RngStream(3, f"{name}/other"))
    s = m.superpose(xs)
    metric = "cosine" if name in ("map", "hrr", "cgr") else None
    good = [m.similarity(s, x, metric) for x in xs]
    bad = m.similarity(s, other, metric)
    if name == "mcr" or name == "bsc":
        # distances: members closer than a stranger
        assert max(good) < bad
    else:
        assert min(good) > bad + 0.2


@FAST
@given(seeds)
def test_bsc_map_self_inverse_exact(seed):
    for name in ("bsc", "map"):
        m = make_model(name, 512)
        a, b = m.random(RngStream(seed, "a")), m.random(RngStream(seed, "b"))
        assert np.array_equal(m.unbind(m.bind(a, b), a).data, b.data)
        assert np.array_equal(m.bind(m.bind(a, b), b).data, a.data)


@FAST
@given(seeds, st.integers(2, 64))
def test_mcr_unbind_exact(seed, r):
    m = make_model("mcr", 256, r=r)
    a, b = m.random(RngStream(seed, "a")), m.random(RngStream(seed, "b"))
    assert np.array_equal(m.unbind(m.bind(a, b), a).data, b.data)


@FAST
@given(seeds)
def test_fhrr_unbind_within_tolerance(seed):
    m = make_model("fhrr", 512)
    a, b = m.random(RngStream(seed, "a")), m.random(RngStream(seed, "b"))
    assert np.max(np.abs(m.unbind(m.bind(a, b), a).data - b.data)) <= 1e-9


@FAST
@given(seeds)
def test_hrr_unbind_approximate(seed):
    m = make_model("hrr", 1024)
    a, b = m.random(RngStream(seed, "a")), m.random(RngStream(seed, "b"))
    assert m.similarity(m.unbind(m.bind(a, b), a), b, "cosine") > 0.5


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([8, 32, 128]))
def test_hrr_matches_direct_convolution(seed, D):
    g = np.random.default_rng(seed)
    a, b = g.standard_normal(D), g.standard_normal(D)
    assert np.allclose(circular_convolve(a, b), direct_conv(a, b), atol=1e-9)


@FAST
@given(seeds, st.sampled_from(["orthogonal", "bipolar"]))
def test_mbat_unbinding(seed, kind):
    m = make_model("mbat", 64, matrix_kind=kind)
    M = m.random_matrix(RngStream(seed, "M"))
    x = m.random(RngStream(seed, "x"))
    back = m.unbind(m.bind(M, x), M)
    tol = 1e-9 if kind == "orthogonal" else 1e-6
    assert np.max(np.abs(back.data - x.data)) <= tol
    if kind == "orthogonal":
        assert M.is_orthogonal()


def test_mbat_rejects_vector_binding():
    m = make_model("mbat", 16)
    x = m.random(RngStream(0))
    with pytest.raises(ModelError):
        m.bind(x, x)
    # role matrices rematerialize from the seed
    assert np.array_equal(m.role_matrix("agent").matrix, make_model("mbat", 16).role_matrix("agent").matrix)


@FAST
@given(seeds)
def test_tpr2_exact_unbinding(seed):
    m = make_model("tpr2", 32)
    roles = m.orthonormal_atoms(4, RngStream(seed, "roles"))
    fillers = [m.random(RngStream(seed, f"f{k}")) for k in range(4)]
    T = m.superpose([m.bind(r, f) for r, f in zip(roles, fillers)])
    for r, f in zip(roles, fillers):
        assert np.max(np.abs(m.unbind(T, r).data - f.data)) <= 1e-9


def test_tpr2_non_orthogonal_atoms_use_unbinding_vectors():
    m = make_model("tpr2", 16)
    roles = [m.random(RngStream(1, f"r{k}")) for k in range(3)]
    fillers = [m.random(RngStream(1, f"f{k}")) for k in range(3)]
    T = m.superpose([m.bind(r, f) for r, f in zip(roles, fillers)])
    U = tpr_unbinding_vectors(roles)
    for u, f in zip(U, fillers):
        assert np.allclose(m.unbind(T, u).data, f.data, atol=1e-9)
    with pytest.raises(ModelError):
        m.bind(T, roles[0])
    assert isinstance(T, Tensor2)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_hamming_dot_identity(seed):
    # d_H(a, b) * D == (D - a'.b') / 2 for the bipolar images a' = 1 - 2a
    D = 1000
    sp = make_model("bsc", D).space
    g = np.random.default_rng(seed)
    A = g.integers(0, 2, (100, D))
    B = g.integers(0, 2, (100, D))
    ham = np.count_nonzero(A != B, axis=1)
    dots = np.sum((1 - 2 * A) * (1 - 2 * B), axis=1)
    assert np.array_equal(2 * ham, D - dots)
    from hyperalg.spaces import Hypervector

    for a, b, h in zip(A[:10], B[:10], ham[:10]):
        assert similarity("hamming", Hypervector(sp, a), Hypervector(sp, b)) * D == h


@FAST
@given(seeds)
def test_unit_norm_metric_correspondence(seed):
    m = make_model("hrr", 256)
    a, b = m.random(RngStream(seed, "a")), m.random(RngStream(seed, "b"))
    a = m.normalize(a, "euclidean")
    b = m.normalize(b, "euclidean")
    dot = similarity("dot", a, b)
    cos = similarity("cosine", a, b)
    euc = similarity("euclidean", a, b)
    assert abs(dot - cos) <= 1e-9
    assert abs(euc**2 - (2 - 2 * cos)) <= 1e-9


def test_bsc_majority_tiebreak_is_deterministic():
    m = make_model("bsc", 128, seed=3)
    a, b = m.random(RngStream(0, "a")), m.random(RngStream(0, "b"))
    s1 = m.superpose([a, b])
    assert s1.equals(make_model("bsc", 128, seed=3).superpose([a, b]))
    # agreeing positions keep their value
    agree = a.data == b.data
    assert np.array_equal(s1.data[agree], a.data[agree])


def test_map_norm_modes():
    m = make_model("map", 64)
    xs = [m.random(RngStream(5, str(k))) for k in range(4)]
    raw = m.superpose(xs)
    assert raw.data.dtype.kind == "i"
    assert set(np.unique(m.superpose(xs, norm="binarize").data)) <= {-1, 1}
    assert np.linalg.norm(m.superpose(xs, norm="euclidean").data) == pytest.approx(1.0)
    assert np.abs(m.superpose(xs, norm="clip", clip_range=(-1, 1)).data).max() <= 1
    with pytest.raises(ModelError):
        m.superpose(xs, norm="majority")


def test_discretize_phases():
    r = 4
    s = np.exp(1j * np.array([0.0, np.pi / 2 + 0.1, np.pi - 0.1, 3 * np.pi / 2]))
    assert list(discretize_phases(s, r)) == [0, 1, 2, 3]


def test_permutation_algebra():
    p = Permutation.random(50, RngStream(1, "p"))
    x = np.arange(50)
    assert np.array_equal(p.inverse().apply(p.apply(x)), x)
    assert np.array_equal(p.power(3).apply(x), p.apply(p.apply(p.apply(x))))
    assert np.array_equal(p.power(-2).apply(p.power(2).apply(x)), x)
    c = Permutation.cyclic(5, 1)
    assert list(c.apply(np.arange(5))) == [4, 0, 1, 2, 3]
    half = p.partial(0.5)
    assert np.count_nonzero(half.apply(x) != x) <= 25
    spec = PermutationSpec(p, 2)
    assert np.array_equal(spec.inverse().resolve().apply(spec.resolve().apply(x)), x)


def test_permute_changes_and_restores():
    m = make_model("map", 1024)
    x = m.random(RngStream(9))
    px = m.permute(x, 1)
    assert abs(m.similarity(px, x)) < 0.1
    assert m.permute(px, -1).equals(x)


# -------------------------------------------------------------- SBC

def test_sbc_index_sum_oracle():
    B = 8
    m = SBC(64, block_size=B)
    g = np.random.default_rng(4)
    for _ in range(20):
        i, j = g.integers(0, B, 8), g.integers(0, B, 8)
        x = np.zeros((8, B), np.uint8)
        y = np.zeros((8, B), np.uint8)
        x[np.arange(8), i] = 1
        y[np.arange(8), j] = 1
        z = m.bind(m.wrap(x.ravel()), m.wrap(y.ravel())).data.reshape(8, B)
        want = np.zeros((8, B), np.uint8)
        want[np.arange(8), (i + j) % B] = 1
        assert np.array_equal(z, want)
        assert np.array_equal(m.unbind(m.wrap(z.ravel()), m.wrap(x.ravel())).data, y.ravel())


def test_block_argmax_ties_take_largest_index():
    s = np.array([1, 3, 3, 0, 2, 2, 2, 2])
    assert list(block_argmax(s, 4)) == [0, 0, 1, 0, 0, 0, 0, 1]


def test_sbc_superpose_argmax_is_canonical():
    m = SBC(64, block_size=8)
    xs = [m.random(RngStream(2, str(k))) for k in range(3)]
    s = m.superpose(xs, norm="argmax")
    assert np.all(s.data.reshape(-1, 8).sum(axis=1) == 1)
    with pytest.raises(ModelError):
        m.bind(m.superpose(xs), xs[0])


# -------------------------------------------------------------- SBDR / CDT

def test_cdt_subset_of_disjunction_and_depth_monotone():
    m = SBDR(4000, seed=1, density=0.02)
    xs = [m.random(RngStream(3, str(k))) for k in range(3)]
    z = disjunction(xs).data.astype(bool)
    prev = 0
    for T in range(1, 9):
        out = cdt(xs, T, m.pool).data.astype(bool)
        assert not np.any(out & ~z)
        assert out.sum() >= prev
        prev = out.sum()


def test_cdt_pool_is_seeded():
    a = SBDR(500, seed=1).pool
    b = SBDR(500, seed=1).pool
    c = SBDR(500, seed=2).pool
    assert all(np.array_equal(p.index, q.index) for p, q in zip(a, b))
    assert not np.array_equal(a[0].index, c[0].index)


def test_cdt_underflow_warns():
    m = SBDR(100, seed=0, density=0.01)
    x = m.random(RngStream(0))
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        for k in range(20):
            cdt([x], 1, m.pool[k:])
    assert any(issubclass(w.category, DensityUnderflowWarning) for w in rec)


def test_conjunction_binding_needs_two():
    m = SBDR(1000, seed=0, binding="conjunction")
    x = m.random(RngStream(0))
    with pytest.raises(ModelError):
        conj_disj_bind([x])
    with pytest.raises(ModelError):
        m.unbind(x, x)


def test_depth_for_density():
    p = 0.0297
    T = depth_for_density(p, 0.01)
    assert p * (1 - (1 - p) ** T) >= 0.01
    assert p * (1 - (1 - p) ** (T - 1)) < 0.01


def test_space_mismatch_raises():
    a = make_model("map", 64).random(RngStream(0))
    with pytest.raises(SpaceError):
        make_model("map", 32).bind(a, a)
