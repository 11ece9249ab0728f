import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from gncoset.code import (
    CodeSpec,
    _check_node_mean,
    _log_phi,
    construct_gaussian_approx,
    construct_product_gaussian_approx,
    derive_component_frozen_sets,
    encode,
    extract_info,
    format_code_spec,
    gaussian_approx_means,
    kronecker_transform,
    load_code_spec,
    save_code_spec,
    syndrome_check,
)

from conftest import component_codewords, generator_matrix


class TestKroneckerTransform:
    def test_hand_examples(self):
        assert kronecker_transform([1, 0]).tolist() == [1, 0]
        assert kronecker_transform([0, 1]).tolist() == [1, 1]

    @pytest.mark.parametrize("m", range(0, 7))
    def test_zero(self, m):
        assert not kronecker_transform(np.zeros(2**m, dtype=np.uint8)).any()

    @pytest.mark.parametrize("m", range(1, 9))
    def test_matches_matrix_product(self, m):
        rng = np.random.default_rng(m)
        v = rng.integers(0, 2, size=(20, 2**m))
        expected = (v @ generator_matrix(m)) % 2
        assert np.array_equal(kronecker_transform(v), expected)

    @given(st.integers(0, 12).flatmap(
        lambda m: st.lists(st.integers(0, 1), min_size=2**m, max_size=2**m)))
    @settings(max_examples=200, deadline=None)
    def test_involution(self, bits):
        assert kronecker_transform(kronecker_transform(bits)).tolist() == bits

    def test_linearity(self):
        rng = np.random.default_rng(0)
        a, b = rng.integers(0, 2, size=(2, 50, 64), dtype=np.uint8)
        assert np.array_equal(kronecker_transform(a ^ b),
                              kronecker_transform(a) ^ kronecker_transform(b))

    @pytest.mark.parametrize("length", [0, 3, 6, 12])
    def test_rejects_non_power_of_two(self, length):
        with pytest.raises(ValueError):
            kronecker_transform(np.zeros(length, dtype=np.uint8))

    @pytest.mark.parametrize("n", [4, 6, 8])
    def test_row_column_factorisation(self, n):
        s = 1 << (n // 2)
        rng = np.random.default_rng(n)
        for u in rng.integers(0, 2, size=(50, s, s), dtype=np.uint8):
            rows_first = kronecker_transform(kronecker_transform(u).T).T
            cols_first = kronecker_transform(kronecker_transform(u.T).T)
            flat = kronecker_transform(u.reshape(-1)).reshape(s, s)
            assert np.array_equal(rows_first, flat)
            assert np.array_equal(cols_first, flat)


class TestEncode:
    def test_hand_example(self):
        spec = CodeSpec(2, (3,))
        assert encode([1], spec).tolist() == [1, 1, 1, 1]
        assert extract_info([1, 1, 1, 1], spec).tolist() == [1]

    def test_zero(self):
        spec = construct_gaussian_approx(6, 40, 3.0)
        assert not encode(np.zeros(40), spec).any()
        assert not extract_info(np.zeros(64), spec).any()

    @given(st.integers(1, 4).map(lambda h: 2 * h), st.data())
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, n, data):
        N = 1 << n
        info_set = data.draw(st.sets(st.integers(0, N - 1), min_size=1, max_size=N))
        spec = CodeSpec(n, tuple(info_set))
        info = np.array(data.draw(st.lists(st.integers(0, 1), min_size=spec.K, max_size=spec.K)))
        assert np.array_equal(extract_info(encode(info, spec), spec), info)

    def test_length_mismatch(self):
        spec = CodeSpec(2, (1, 3))
        with pytest.raises(ValueError):
            encode([1], spec)
        with pytest.raises(ValueError):
            extract_info([0, 0], spec)

    def test_batch(self):
        spec = construct_gaussian_approx(4, 10, 2.0)
        info = np.random.default_rng(0).integers(0, 2, size=(7, 10))
        batch = encode(info, spec)
        assert np.array_equal(batch[3], encode(info[3], spec))


class TestCodeSpec:
    @pytest.mark.parametrize("n", [0, 1, 3, 5])
    def test_rejects_odd_or_small_n(self, n):
        with pytest.raises(ValueError):
            CodeSpec(n, (0,))

    def test_rejects_bad_info_sets(self):
        with pytest.raises(ValueError):
            CodeSpec(2, ())
        with pytest.raises(ValueError):
            CodeSpec(2, (4,))
        with pytest.raises(ValueError):
            CodeSpec(2, (1, 1))

    def test_info_set_sorted(self):
        assert CodeSpec(4, (9, 3, 15)).info_set == (3, 9, 15)

    def test_frozen_sets_follow_info_set(self):
        spec = CodeSpec(4, (15,))
        assert spec.col_frozen == {0, 1, 2}
        assert spec.row_frozen == {0, 1, 2}
        assert spec.col_frozen_mask.tolist() == [1, 1, 1, 0]


class TestFrozenSets:
    def test_all_info(self):
        assert derive_component_frozen_sets(4, range(16)) == (frozenset(), frozenset())

    def test_no_info(self):
        full = frozenset(range(4))
        assert derive_component_frozen_sets(4, []) == (full, full)

    def test_single_corner(self):
        assert derive_component_frozen_sets(4, [15]) == ({0, 1, 2}, {0, 1, 2})

    def test_rectangular_pattern(self):
        # rows 1 and 3, columns 0 and 2 carry information
        info = [r * 4 + c for r in (1, 3) for c in (0, 2)]
        assert derive_component_frozen_sets(4, info) == ({0, 2}, {1, 3})

    def test_order_invariant(self):
        rng = np.random.default_rng(3)
        info = rng.choice(64, size=20, replace=False)
        ref = derive_component_frozen_sets(6, info)
        for _ in range(5):
            assert derive_component_frozen_sets(6, rng.permutation(info)) == ref
        assert derive_component_frozen_sets(6, set(info.tolist())) == ref

    def test_components_are_component_codes(self):
        # every column / row of an encoded word lies in its component code
        spec = construct_product_gaussian_approx(6, 30, 4.0)
        rng = np.random.default_rng(0)
        for info in rng.integers(0, 2, size=(30, spec.K)):
            x = encode(info, spec).reshape(spec.sqrt_n, spec.sqrt_n)
            assert all(syndrome_check(x[:, i], spec.col_frozen) for i in range(spec.sqrt_n))
            assert all(syndrome_check(x[i, :], spec.row_frozen) for i in range(spec.sqrt_n))


class TestSyndromeCheck:
    def test_zero_word(self):
        assert syndrome_check(np.zeros(8, dtype=np.uint8), range(8))

    def test_fully_frozen(self):
        assert not syndrome_check([1, 0, 0, 0], {0, 1, 2, 3})

    @pytest.mark.parametrize("length", [4, 8])
    def test_matches_enumeration(self, length):
        rng = np.random.default_rng(length)
        frozen_sets = [set(), set(range(length))] + [
            set(np.flatnonzero(rng.random(length) < 0.5).tolist()) for _ in range(12)]
        for frozen in frozen_sets:
            code = component_codewords(length, frozen)
            for word in code:
                assert syndrome_check(word, frozen)
            for v in rng.integers(0, 2, size=(200, length)):
                assert syndrome_check(v, frozen) == (tuple(v) in code)


def _phi_exact(m):
    # 1 - E[tanh(L/2)], L ~ N(m, 2m), by quadrature
    sd = math.sqrt(2 * m)
    f = lambda x: math.tanh(x / 2) * math.exp(-((x - m) ** 2) / (4 * m)) / (sd * math.sqrt(2 * math.pi))
    val, _ = integrate.quad(f, m - 12 * sd, m + 12 * sd, limit=200)
    return 1.0 - val


class TestGaussianApprox:
    @pytest.mark.parametrize("m", [0.5, 1.0, 3.0, 8.0, 15.0, 30.0])
    def test_phi_close_to_quadrature(self, m):
        approx = math.exp(_log_phi(m))
        assert approx == pytest.approx(_phi_exact(m), rel=0.1)

    def test_check_node_mean_below_input(self):
        for m in [0.1, 1.0, 5.0, 20.0, 200.0, 5000.0]:
            assert 0.0 < _check_node_mean(m) < m

    def test_means_finite_for_large_n(self):
        means = gaussian_approx_means(14, 6.3)
        assert np.isfinite(means).all()
        assert means[-1] == pytest.approx(2**14 * 4 * 10 ** 0.63)

    def test_all_selected(self):
        spec = construct_gaussian_approx(6, 64, 2.0)
        assert spec.info_set == tuple(range(64))

    @pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
    @pytest.mark.parametrize("snr", [0.0, 3.0, 6.8])
    def test_single_bit_is_last(self, n, snr):
        # exhaustive: the all-ones index is the strongest synthetic channel
        means = gaussian_approx_means(n, snr)
        assert int(np.argmax(means)) == (1 << n) - 1
        assert construct_gaussian_approx(n, 1, snr).info_set == ((1 << n) - 1,)

    def test_nested(self):
        small = set(construct_gaussian_approx(8, 100, 4.0).info_set)
        large = set(construct_gaussian_approx(8, 180, 4.0).info_set)
        assert small <= large

    def test_large_baseline_size(self):
        spec = construct_gaussian_approx(10, 885, 6.8)
        assert spec.K == 885 and spec.N == 1024

    def test_bad_k(self):
        with pytest.raises(ValueError):
            construct_gaussian_approx(4, 0, 1.0)
        with pytest.raises(ValueError):
            construct_gaussian_approx(4, 17, 1.0)

    def test_deterministic(self):
        assert construct_gaussian_approx(10, 500, 2.5) == construct_gaussian_approx(10, 500, 2.5)


class TestProductConstruction:
    def test_desk_code(self):
        spec = construct_product_gaussian_approx(8, 220, 6.8)
        assert spec.K == 220
        assert spec.col_frozen == {0} and spec.row_frozen == {0}

    def test_square_k_is_exact_product(self):
        spec = construct_product_gaussian_approx(8, 196, 4.0)
        rows = {i // 16 for i in spec.info_set}
        cols = {i % 16 for i in spec.info_set}
        assert len(rows) == len(cols) == 14
        assert set(spec.info_set) == {r * 16 + c for r in rows for c in cols}

    def test_full(self):
        assert construct_product_gaussian_approx(4, 16, 1.0).info_set == tuple(range(16))


class TestSpecFile:
    def test_round_trip(self, tmp_path):
        spec = construct_gaussian_approx(6, 33, 3.0)
        path = tmp_path / "code.txt"
        save_code_spec(spec, path)
        assert load_code_spec(path) == spec
        assert path.read_text().splitlines()[:2] == ["n=6", "K=33"]

    def test_format(self):
        assert format_code_spec(CodeSpec(2, (1, 3))) == "n=2\nK=2\nA=1,3\n"

    @pytest.mark.parametrize("text", [
        "n=4\nK=2\nA=3,1\n",     # not ascending
        "n=4\nK=3\nA=1,3\n",     # K mismatch
        "n=3\nK=1\nA=1\n",       # odd n
        "n=4\nK=1\n",            # missing A
        "n=4\nK=1\nA=16\n",      # out of range
        "garbage\n",
    ])
    def test_rejects_invalid(self, tmp_path, text):
        path = tmp_path / "bad.txt"
        path.write_text(text)
        with pytest.raises(ValueError):
            load_code_spec(path)
