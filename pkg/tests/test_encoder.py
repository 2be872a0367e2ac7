"""Reference encoder: tokenization, forward/backward, external backends."""

import sys

import numpy as np
import pytest

from valnov.encoder import (
    EncoderConfig,
    HttpEncoder,
    PretrainedSource,
    ReferenceEncoder,
    SubprocessEncoder,
    load_pretrained,
    tokenize,
)
from valnov.errors import ConfigurationError


class TestTokenize:
    def test_lowercase_split_strip(self):
        assert tokenize("The cat, the hat!") == ["the", "cat", "the", "hat"]

    def test_inner_punctuation_kept(self):
        assert tokenize("don't co-op") == ["don't", "co-op"]

    def test_pure_punctuation_dropped(self):
        assert tokenize("... -- !!") == []

    def test_empty(self):
        assert tokenize("") == []


def small_encoder(seed=0):
    return ReferenceEncoder(
        EncoderConfig(vocab_buckets=64, embed_dim=6, projection_dim=4, seed=seed)
    )


class TestReferenceEncoder:
    def test_deterministic_per_seed(self):
        a = small_encoder(seed=3).encode(["some text", "more text"])
        b = small_encoder(seed=3).encode(["some text", "more text"])
        assert np.array_equal(a, b)

    def test_seed_changes_weights(self):
        a = small_encoder(seed=0).encode(["some text"])
        b = small_encoder(seed=1).encode(["some text"])
        assert not np.allclose(a, b)

    def test_output_shape_and_range(self):
        out = small_encoder().encode(["a b c", "d"])
        assert out.shape == (2, 4)
        assert np.all(np.abs(out) <= 1.0)  # tanh

    def test_empty_text_pools_to_bias_only(self):
        enc = small_encoder()
        out = enc.encode(["..."])  # tokenizes to nothing
        assert np.allclose(out[0], np.tanh(enc.proj_b))

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            EncoderConfig(vocab_buckets=0)

    def test_set_parameters_copies(self):
        enc = small_encoder()
        params = {k: v.copy() for k, v in enc.parameters().items()}
        params["proj_b"] += 1.0
        enc.set_parameters(params)
        assert np.allclose(enc.proj_b, 1.0)
        params["proj_b"] += 5.0  # must not alias into the encoder
        assert np.allclose(enc.proj_b, 1.0)


def test_backward_matches_finite_differences():
    enc = small_encoder(seed=7)
    texts = ["alpha beta gamma", "beta beta", "..."]
    target = np.random.default_rng(0).normal(size=(3, 4))

    def loss_value():
        return 0.5 * float(((enc.forward(texts).outputs - target) ** 2).sum())

    cache = enc.forward(texts)
    grads = enc.backward(cache, cache.outputs - target)

    eps = 1e-6
    for name, param in enc.parameters().items():
        flat = param.ravel()
        idx = np.random.default_rng(1).choice(flat.size, size=min(12, flat.size), replace=False)
        for i in idx:
            orig = flat[i]
            flat[i] = orig + eps
            up = loss_value()
            flat[i] = orig - eps
            down = loss_value()
            flat[i] = orig
            fd = (up - down) / (2 * eps)
            an = grads[name].ravel()[i]
            assert an == pytest.approx(fd, rel=1e-5, abs=1e-8), name


class TestExternalBackends:
    def test_subprocess_round_trip(self):
        child = (
            "import sys\n"
            "for line in sys.stdin:\n"
            "    n = len(line.split())\n"
            "    print(' '.join(str(float(n + i)) for i in range(3)))\n"
            "    sys.stdout.flush()\n"
        )
        enc = SubprocessEncoder([sys.executable, "-c", child], projection_dim=3)
        try:
            out = enc.encode(["a b", "a b c d"])
            assert np.allclose(out, [[2, 3, 4], [4, 5, 6]])
        finally:
            enc.close()

    def test_subprocess_dimension_mismatch(self):
        child = (
            "import sys\n"
            "for line in sys.stdin:\n"
            "    print('1.0 2.0')\n"
            "    sys.stdout.flush()\n"
        )
        enc = SubprocessEncoder([sys.executable, "-c", child], projection_dim=3)
        try:
            with pytest.raises(ConfigurationError, match="dim 2"):
                enc.encode(["text"])
        finally:
            enc.close()

    def test_subprocess_bad_command(self):
        with pytest.raises(ConfigurationError):
            SubprocessEncoder(["/nonexistent-encoder-binary"], projection_dim=3)

    def test_http_endpoint_unreachable(self):
        enc = HttpEncoder("http://127.0.0.1:1/encode", projection_dim=3, timeout=0.2)
        with pytest.raises(ConfigurationError, match="unusable"):
            enc.encode(["text"])


class TestLoadPretrained:
    def test_reference_kind(self):
        enc = load_pretrained(PretrainedSource(kind="reference"))
        assert isinstance(enc, ReferenceEncoder)

    def test_external_needs_exactly_one_backend(self):
        with pytest.raises(ConfigurationError, match="exactly one"):
            load_pretrained(PretrainedSource(kind="external"))

    def test_external_probe_runs(self):
        child = (
            "import sys\n"
            "for line in sys.stdin:\n"
            "    print(' '.join('0.5' for _ in range(32)))\n"
            "    sys.stdout.flush()\n"
        )
        enc = load_pretrained(
            PretrainedSource(kind="external", command=(sys.executable, "-c", child))
        )
        assert enc.projection_dim == 32
        enc.close()

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError, match="unknown"):
            load_pretrained(PretrainedSource(kind="mystery"))
