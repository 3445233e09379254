"""Property-based tests for hashing, authentication and key-length accounting."""

import numpy as np
from hypothesis import given, settings, strategies as st

from src.qkdsim.bounds import binary_entropy, clopper_pearson_upper
from src.qkdsim.models import Party
from src.qkdsim.postproc.amplification import secret_length
from src.qkdsim.postproc.authentication import AuthKeyPool, gf64_mul, wc_tag, wc_verify
from src.qkdsim.postproc.estimation import split_test_bits
from src.qkdsim.postproc.hashing import toeplitz_hash
from src.qkdsim.protocols.records import SiftedKey

bit_arrays = st.lists(st.integers(0, 1), min_size=1, max_size=200).map(
    lambda xs: np.array(xs, dtype=np.uint8))
u64 = st.integers(min_value=0, max_value=2 ** 64 - 1)


class TestToeplitzLinearity:
    """Toeplitz hashing is linear over GF(2)."""
    
    @given(data=st.data(), out_len=st.integers(min_value=1, max_value=64))
    def test_hash_of_xor_is_xor_of_hashes(self, data, out_len):
        """Test h(x ^ y) == h(x) ^ h(y) for any pair of equal-length inputs."""
        x = data.draw(bit_arrays)
        y = data.draw(st.lists(st.integers(0, 1), min_size=len(x), max_size=len(x)))
        y = np.array(y, dtype=np.uint8)
        seed = np.array(data.draw(st.lists(st.integers(0, 1), min_size=len(x) + out_len - 1,
                                           max_size=len(x) + out_len - 1)), dtype=np.uint8)
        
        combined = toeplitz_hash(x ^ y, seed, out_len)
        separate = toeplitz_hash(x, seed, out_len) ^ toeplitz_hash(y, seed, out_len)
        assert combined.tolist() == separate.tolist()


class TestGF64:
    """GF(2^64) multiplication is a commutative ring product."""
    
    @given(a=u64, b=u64, c=u64)
    def test_distributive(self, a, b, c):
        """Test a (b + c) == ab + ac."""
        assert gf64_mul(a, b ^ c) == gf64_mul(a, b) ^ gf64_mul(a, c)
    
    @given(a=u64, b=u64)
    def test_commutative_and_reduced(self, a, b):
        """Test ab == ba and the product stays below 2^64."""
        product = gf64_mul(a, b)
        
        assert product == gf64_mul(b, a)
        assert product < 2 ** 64


class TestWegmanCarter:
    """Honest tags always verify."""
    
    @given(message=st.binary(max_size=256), seed=st.integers(min_value=0, max_value=2 ** 32))
    @settings(max_examples=50)
    def test_honest_tag_verifies(self, message, seed):
        """Test that the receiver's pool copy accepts the sender's tag."""
        pool = AuthKeyPool.from_rng(256, np.random.default_rng(seed))
        receiver = pool.copy()
        
        assert wc_verify(message, wc_tag(message, pool), receiver)
        assert pool.remaining == receiver.remaining


class TestSecretLength:
    """Secret length accounting."""
    
    @given(
        n=st.integers(min_value=0, max_value=10 ** 6),
        e1=st.floats(min_value=0.0, max_value=0.5),
        leak=st.integers(min_value=0, max_value=10 ** 6),
        fraction=st.floats(min_value=0.0, max_value=1.0),
        s=st.integers(min_value=1, max_value=64),
        l=st.integers(min_value=1, max_value=64),
    )
    def test_length_bounded_and_non_negative(self, n, e1, leak, fraction, s, l):
        """Test 0 <= length <= n A (1 - h2(e1)) - leak - 2l - s (when positive)."""
        length = secret_length(n, e1, leak, fraction, s, l)
        
        assert length >= 0
        assert length <= max(0.0, n * fraction * (1 - binary_entropy(e1)) - leak - 2 * l - s) + 1e-6
    
    @given(n=st.integers(min_value=1, max_value=10 ** 5),
           leak=st.integers(min_value=0, max_value=10 ** 4),
           extra=st.integers(min_value=1, max_value=10 ** 4))
    def test_more_leakage_never_lengthens(self, n, leak, extra):
        """Test monotonicity in the disclosed bits."""
        assert secret_length(n, 0.02, leak + extra, 1.0, 10, 10) <= \
            secret_length(n, 0.02, leak, 1.0, 10, 10)


class TestSampling:
    """Test-bit sampling partitions the sifted key."""
    
    @given(n=st.integers(min_value=1, max_value=500),
           fraction=st.floats(min_value=0.01, max_value=0.99),
           seed=st.integers(min_value=0, max_value=2 ** 32))
    def test_split_is_partition(self, n, fraction, seed):
        """Test disjoint, exhaustive and order-preserving subsets."""
        slots = np.arange(n) * 2
        bits = np.zeros(n, dtype=np.uint8)
        pair = (SiftedKey(bits, slots, Party.ALICE), SiftedKey(bits.copy(), slots, Party.BOB))
        test, code = split_test_bits(pair, fraction, np.random.default_rng(seed))
        
        assert len(test[0]) >= 1
        assert len(test[0]) + len(code[0]) == n
        assert not set(test[0].slots.tolist()) & set(code[0].slots.tolist())
        assert test[0].slots.tolist() == test[1].slots.tolist()


class TestClopperPearson:
    """The upper bound dominates the point estimate."""
    
    @given(n=st.integers(min_value=1, max_value=10 ** 5), data=st.data())
    def test_upper_bound_above_point(self, n, data):
        """Test errors / n <= upper <= 1."""
        errors = data.draw(st.integers(min_value=0, max_value=n))
        upper = clopper_pearson_upper(errors, n, 1 - 2 ** -10)
        
        assert errors / n <= upper <= 1.0
