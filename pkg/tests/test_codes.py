import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from noisecycle.channel import ebn0_to_sigma
from noisecycle.codes import (
    CRC8, CRC11, LinearCode,
    ca_polar_code, ca_polar_encode, ca_polar_extract, ca_polar_spec,
    crc_for_blocklength, gf2_matmul, gf2_nullspace, gf2_rref,
    pack_columns, polar_transform, rlc, systematic_code,
)


def gf2_rank(a):
    _, pivots = gf2_rref(a)
    return len(pivots)


# --------------------------------------------------------------------------- rlc


def test_rlc_hand_example_all_ones_parity():
    code = systematic_code(np.ones((2, 2), dtype=np.uint8))
    assert np.array_equal(code.G, [[1, 0, 1, 1], [0, 1, 1, 1]])
    assert np.array_equal(code.H, [[1, 1, 1, 0], [1, 1, 0, 1]])
    assert not gf2_matmul(code.G, code.H.T).any()


def test_rlc_structure_and_rank():
    code = rlc(24, 12, np.random.default_rng(0))
    assert code.n == 24 and code.k == 12
    assert np.array_equal(code.G[:, :12], np.eye(12, dtype=np.uint8))
    assert gf2_rank(code.G) == 12
    assert gf2_rank(code.H) == 12
    assert not gf2_matmul(code.G, code.H.T).any()


def test_rlc_deterministic_for_fixed_seed():
    a = rlc(16, 8, np.random.default_rng(42))
    b = rlc(16, 8, np.random.default_rng(42))
    assert np.array_equal(a.G, b.G) and np.array_equal(a.H, b.H)


def test_rlc_rejects_bad_dimensions():
    with pytest.raises(ValueError):
        rlc(8, 8, np.random.default_rng(0))
    with pytest.raises(ValueError):
        rlc(8, 0, np.random.default_rng(0))


def test_encode_membership_consistency():
    code = rlc(32, 16, np.random.default_rng(1))
    rng = np.random.default_rng(2)
    for _ in range(1000):
        u = rng.integers(0, 2, 16, dtype=np.uint8)
        assert code.is_codeword(code.encode(u))


def test_is_codeword_rejects_single_flips_dmin2():
    code = systematic_code(np.ones((2, 2), dtype=np.uint8))  # dmin = 2
    cw = code.encode(np.array([1, 0], dtype=np.uint8))
    for j in range(4):
        bad = cw.copy()
        bad[j] ^= 1
        assert not code.is_codeword(bad)


def test_syndrome_int_matches_matrix_syndrome():
    code = rlc(20, 11, np.random.default_rng(3))
    rng = np.random.default_rng(4)
    for _ in range(50):
        w = rng.integers(0, 2, 20, dtype=np.uint8)
        s_ref = gf2_matmul(code.H, w[:, None])[:, 0]
        s_int = code.syndrome_int(w)
        assert s_int == sum(int(b) << i for i, b in enumerate(s_ref))


def test_pack_columns_roundtrip():
    h = np.random.default_rng(5).integers(0, 2, (6, 9), dtype=np.uint8)
    cols = pack_columns(h)
    for j in range(9):
        assert cols[j] == sum(int(h[s, j]) << s for s in range(6))


def test_gf2_nullspace_is_orthogonal_complement():
    a = np.random.default_rng(6).integers(0, 2, (5, 12), dtype=np.uint8)
    ns = gf2_nullspace(a)
    assert ns.shape[0] == 12 - gf2_rank(a)
    assert not gf2_matmul(a, ns.T).any()
    assert gf2_rank(ns) == ns.shape[0]


# --------------------------------------------------------------------------- crc


def _poly_mod_reference(bits, poly: int) -> int:
    """Independent long-division oracle: remainder of bits * x^deg mod poly."""
    deg = poly.bit_length() - 1
    val = 0
    for b in bits:
        val = (val << 1) | int(b)
    val <<= deg
    for shift in range(val.bit_length() - 1, deg - 1, -1):
        if (val >> shift) & 1:
            val ^= poly << (shift - deg)
    return val


def test_crc8_published_check_value():
    # "123456789" through x^8 + x^2 + x + 1 gives the classic check 0xF4
    bits = np.unpackbits(np.frombuffer(b"123456789", dtype=np.uint8))
    chk = CRC8.checksum_bits(bits)
    assert int("".join(map(str, chk)), 2) == 0xF4


def test_crc_matches_long_division_oracle():
    rng = np.random.default_rng(7)
    for spec in (CRC8, CRC11):
        for _ in range(50):
            msg = rng.integers(0, 2, int(rng.integers(1, 80)), dtype=np.uint8)
            got = int("".join(map(str, spec.checksum_bits(msg))), 2)
            assert got == _poly_mod_reference(msg, spec.poly)


def test_crc_append_check_roundtrip_and_flips():
    rng = np.random.default_rng(8)
    for _ in range(100):
        msg = rng.integers(0, 2, 24, dtype=np.uint8)
        word = CRC8.append(msg)
        assert len(word) == 32
        assert CRC8.check(word)
        j = int(rng.integers(0, 32))
        bad = word.copy()
        bad[j] ^= 1
        assert not CRC8.check(bad)


def test_crc_zero_and_degenerate_cases():
    assert not CRC8.checksum_bits(np.zeros(16, dtype=np.uint8)).any()
    assert CRC8.check(np.zeros(20, dtype=np.uint8))
    assert not CRC8.check(np.zeros(8, dtype=np.uint8))  # length <= degree
    assert crc_for_blocklength(128) is CRC8
    assert crc_for_blocklength(256) is CRC11
    assert CRC11.degree == 11


@given(st.lists(st.integers(0, 1), min_size=1, max_size=48))
def test_crc_check_of_append_always_true(bits):
    word = CRC8.append(np.array(bits, dtype=np.uint8))
    assert CRC8.check(word)


# --------------------------------------------------------------------------- polar


def test_polar_kernel_p1():
    assert np.array_equal(polar_transform([0, 1]), [1, 1])
    assert np.array_equal(polar_transform([1, 0]), [1, 0])
    assert np.array_equal(polar_transform([1, 1]), [0, 1])


def test_polar_transform_matches_kronecker_power():
    f = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    rng = np.random.default_rng(9)
    for p in range(1, 7):
        n = 2**p
        mat = f
        for _ in range(p - 1):
            mat = np.kron(mat, f) % 2
        for _ in range(20):
            v = rng.integers(0, 2, n, dtype=np.uint8)
            assert np.array_equal(polar_transform(v), gf2_matmul(v, mat))


def test_polar_involution_all_lengths():
    rng = np.random.default_rng(10)
    for n in (2, 4, 8, 16, 32, 64, 128, 256):
        for _ in range(125):
            v = rng.integers(0, 2, n, dtype=np.uint8)
            assert np.array_equal(polar_transform(polar_transform(v)), v)


def test_polar_linearity_and_errors():
    rng = np.random.default_rng(11)
    a = rng.integers(0, 2, 32, dtype=np.uint8)
    b = rng.integers(0, 2, 32, dtype=np.uint8)
    assert np.array_equal(polar_transform(a ^ b),
                          polar_transform(a) ^ polar_transform(b))
    assert not polar_transform(np.zeros(16, dtype=np.uint8)).any()
    with pytest.raises(ValueError):
        polar_transform([0, 1, 1])


def test_polar_kernel_row_example():
    # placing a single one on the last position yields the all-ones row pair
    u = np.array([0, 1], dtype=np.uint8)
    assert np.array_equal(polar_transform(u), [1, 1])


# --------------------------------------------------------------------------- ca-polar


def _design_sigma(n, k, db=4.5):
    return ebn0_to_sigma(db, k / n)


def test_ca_polar_spec_layout():
    spec = ca_polar_spec(64, 46, _design_sigma(64, 46))
    assert spec.crc.degree == 8
    assert len(spec.info_set) == 46 + 8
    assert len(set(spec.info_set.tolist())) == 54
    assert np.array_equal(spec.info_set, np.sort(spec.info_set))
    # the most reliable synthetic channel (last position) must be unfrozen,
    # and the least reliable (first) frozen
    assert 63 in spec.info_set
    assert 0 not in spec.info_set


def test_ca_polar_spec_crc_by_blocklength():
    assert ca_polar_spec(256, 170, _design_sigma(256, 170)).crc.degree == 11
    with pytest.raises(ValueError):
        ca_polar_spec(64, 60, _design_sigma(64, 60))  # k + r exceeds n


def test_ca_polar_encode_zero_and_roundtrip():
    spec = ca_polar_spec(64, 46, _design_sigma(64, 46))
    assert not ca_polar_encode(spec, np.zeros(46, dtype=np.uint8)).any()
    rng = np.random.default_rng(12)
    for _ in range(50):
        msg = rng.integers(0, 2, 46, dtype=np.uint8)
        cw = ca_polar_encode(spec, msg)
        assert np.array_equal(ca_polar_extract(spec, cw), msg)


def test_ca_polar_codewords_satisfy_frozen_and_crc_constraints():
    spec = ca_polar_spec(64, 46, _design_sigma(64, 46))
    frozen = np.setdiff1d(np.arange(64), spec.info_set)
    rng = np.random.default_rng(13)
    for _ in range(50):
        msg = rng.integers(0, 2, 46, dtype=np.uint8)
        u = polar_transform(ca_polar_encode(spec, msg))  # inverse transform
        assert not u[frozen].any()
        assert spec.crc.check(u[spec.info_set])


def test_ca_polar_linear_code_view():
    code = ca_polar_code(64, 46, _design_sigma(64, 46))
    assert isinstance(code, LinearCode)
    assert code.H.shape == (18, 64)
    assert gf2_rank(code.G) == 46
    assert gf2_rank(code.H) == 18
    rng = np.random.default_rng(14)
    for _ in range(200):
        msg = rng.integers(0, 2, 46, dtype=np.uint8)
        cw = code.encode(msg)
        assert code.is_codeword(cw)
        assert np.array_equal(code.message_from_codeword(cw), msg)


def test_ca_polar_membership_requires_both_polar_and_crc():
    # words passing the polar frozen-set constraint but carrying a corrupted
    # CRC must be rejected by the joint parity-check matrix
    spec = ca_polar_spec(32, 20, _design_sigma(32, 20))
    code = ca_polar_code(32, 20, _design_sigma(32, 20))
    rng = np.random.default_rng(15)
    for _ in range(50):
        msg = rng.integers(0, 2, 20, dtype=np.uint8)
        u = np.zeros(32, dtype=np.uint8)
        payload = spec.crc.append(msg)
        payload[-1] ^= 1  # break only the CRC part
        u[spec.info_set] = payload
        word = polar_transform(u)
        assert not code.is_codeword(word)


def test_ca_polar_message_length_validation():
    spec = ca_polar_spec(64, 46, _design_sigma(64, 46))
    with pytest.raises(ValueError):
        ca_polar_encode(spec, np.zeros(45, dtype=np.uint8))


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 2**20 - 1))
def test_ca_polar_encode_is_linear(x):
    spec = ca_polar_spec(32, 20, _design_sigma(32, 20))
    bits = np.array([(x >> i) & 1 for i in range(20)], dtype=np.uint8)
    other = np.array([(x >> (19 - i)) & 1 for i in range(20)], dtype=np.uint8)
    lhs = ca_polar_encode(spec, bits ^ other)
    rhs = ca_polar_encode(spec, bits) ^ ca_polar_encode(spec, other)
    assert np.array_equal(lhs, rhs)
