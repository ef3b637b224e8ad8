"""Unit tests for retraining, NegGrad+, CF-k and EU-k."""
import numpy as np
import pytest

from src.autodiff import ops
from src.autodiff.optim import Adam
from src.autodiff.tensor import backward
from src.baselines.methods import (
    NEGGRAD_COLUMNS,
    cf_k,
    eu_k,
    frozen_names,
    neggrad_plus,
    neggrad_step,
    reinitialize,
    retrain,
    trainable_names,
)
from src.config import BaselineConfig, TrainConfig
from src.data.samples import Batch
from src.errors import InvalidInputError
from src.model.checkpoint import checkpoint_bytes, parse_checkpoint
from src.model.network import PARAM_NAMES, Model
from src.model.train import gradients, train_original


def _ce(model, batch):
    return ops.softmax_cross_entropy(model.forward(batch).logits, batch.labels)[0].item()


class TestRetrain:
    """Exact unlearning by retraining from scratch."""

    def test_empty_forget_reproduces_original(self, tiny_train, tiny_tokenizer):
        """Same seeds and the full train set give the original model bit for bit."""
        config = TrainConfig(epochs=3, batch_size=16)
        original = train_original(Model.init(tiny_tokenizer, seed=1), tiny_train, config, seed=2)
        retrained = retrain(tiny_train, tiny_tokenizer, config, init_seed=1, train_seed=2)
        assert retrained.params.equals(original.params)

    def test_retain_only_differs(self, tiny_retain, tiny_train, tiny_tokenizer):
        config = TrainConfig(epochs=2, batch_size=16)
        original = train_original(Model.init(tiny_tokenizer, seed=1), tiny_train, config, seed=2)
        retrained = retrain(tiny_retain, tiny_tokenizer, config, init_seed=1, train_seed=2)
        assert not retrained.params.equals(original.params)


class TestLayerFreezing:
    """Layer-group bookkeeping shared by CF-k and EU-k."""

    def test_first_two_groups_are_the_image_encoder(self):
        assert frozen_names(2) == ["img_w1", "img_b1", "img_w2", "img_b2"]
        assert set(trainable_names(2)) == set(PARAM_NAMES) - set(frozen_names(2))

    def test_k_zero_freezes_nothing(self):
        assert frozen_names(0) == []

    @pytest.mark.parametrize("k", [-1, 5, 9])
    def test_k_out_of_range(self, k):
        with pytest.raises(InvalidInputError):
            frozen_names(k)

    def test_reinitialize_only_named(self, tiny_model):
        fresh = reinitialize(tiny_model, ["head_w"], seed=0)
        assert not np.array_equal(fresh.params["head_w"].data, tiny_model.params["head_w"].data)
        assert np.array_equal(fresh.params["img_w1"].data, tiny_model.params["img_w1"].data)


class TestFineTuneBaselines:
    """CF-k and EU-k."""

    config = BaselineConfig(method="cf_k", k=2, epochs=2, lr=1e-3, batch_size=8, seed=3)

    def test_cf_k_keeps_frozen_layers(self, tiny_model, tiny_retain):
        model = cf_k(tiny_model, tiny_retain, self.config)
        for name in frozen_names(2):
            assert np.array_equal(model.params[name].data, tiny_model.params[name].data), name
        assert not np.array_equal(model.params["head_w"].data, tiny_model.params["head_w"].data)

    def test_eu_k_reinitializes_unfrozen_layers(self, tiny_model, tiny_retain):
        config = self.config.model_copy(update={"method": "eu_k"})
        trace = []
        model = eu_k(tiny_model, tiny_retain, config, trace)
        for name in frozen_names(2):
            assert np.array_equal(model.params[name].data, tiny_model.params[name].data), name
        assert not np.array_equal(model.params["txt_w"].data, tiny_model.params["txt_w"].data)
        assert len(trace) >= 1

    def test_deterministic(self, tiny_model, tiny_retain):
        assert cf_k(tiny_model, tiny_retain, self.config).params.equals(
            cf_k(tiny_model, tiny_retain, self.config).params
        )


class TestNegGradPlus:
    """Retain descent plus forget ascent."""

    def test_step_raises_forget_loss(self, tiny_model, tiny_forget, tiny_retain):
        """One step with a large gamma increases cross-entropy on the step's forget batch."""
        model = tiny_model.copy(track_grad=True)
        params = model.params.trainable()
        forget_batch = Batch.from_samples(tiny_forget[:4])
        retain_batch = Batch.from_samples(tiny_retain[:4])
        before = _ce(model, forget_batch)
        _, total, tape = neggrad_step(model, retain_batch, forget_batch, gamma=10.0)
        backward(total, tape, params.values())
        Adam(params, lr=1e-3).step(gradients(params))
        assert _ce(model, forget_batch) > before

    def test_zero_gamma_total_is_retain_loss(self, tiny_model, tiny_forget, tiny_retain):
        config = BaselineConfig(gamma=0.0, epochs=1, lr=1e-4, batch_size=4, seed=0)
        _, trace = neggrad_plus(tiny_model, tiny_retain, tiny_forget, config)
        assert list(trace.columns) == NEGGRAD_COLUMNS
        assert trace["total"].iloc[0] == pytest.approx(trace["ce_retain"].iloc[0])

    def test_deterministic(self, tiny_model, tiny_forget, tiny_retain):
        config = BaselineConfig(gamma=1.0, epochs=2, lr=1e-4, batch_size=4, seed=7)
        a, trace_a = neggrad_plus(tiny_model, tiny_retain, tiny_forget, config)
        b, trace_b = neggrad_plus(tiny_model, tiny_retain, tiny_forget, config)
        assert a.params.equals(b.params)
        assert trace_a.equals(trace_b)

    def test_empty_forget_rejected(self, tiny_model, tiny_retain):
        with pytest.raises(InvalidInputError):
            neggrad_plus(tiny_model, tiny_retain, [], BaselineConfig())


class TestBaselineCheckpoints:
    """Every baseline's output survives the FMCK format."""

    @staticmethod
    def _run(method, og, forget, retain, tokenizer):
        config = BaselineConfig(method=method, k=2, epochs=1, lr=1e-3, batch_size=8, seed=1)
        if method == "retrain":
            return retrain(retain, tokenizer, TrainConfig(epochs=2, batch_size=16), init_seed=1, train_seed=2)
        if method == "neggrad_plus":
            return neggrad_plus(og, retain, forget, config)[0]
        return {"cf_k": cf_k, "eu_k": eu_k}[method](og, retain, config)

    @pytest.mark.parametrize("method", ["retrain", "neggrad_plus", "cf_k", "eu_k"])
    def test_round_trip(self, method, tiny_model, tiny_forget, tiny_retain, tiny_tokenizer):
        model = self._run(method, tiny_model, tiny_forget, tiny_retain, tiny_tokenizer)
        restored = parse_checkpoint(checkpoint_bytes(model))
        assert restored.params.equals(model.params)
        assert restored.tokenizer == model.tokenizer
        assert checkpoint_bytes(restored) == checkpoint_bytes(model)
