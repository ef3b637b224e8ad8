"""Configuration management using Pydantic BaseSettings and validated config models."""
import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.errors import ConfigError
from src.utils.fuzzy import suggest_key
from src.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

STANDARD_FORGET_PCTS = (3, 6, 10)
UNLEARN_LEARNING_RATES = (1e-4, 1e-5)
METHODS = ("forget-mi", "retrain", "neggrad_plus", "cf_k", "eu_k")

# Image noise grid explored for the Forget-MI experiments.
NOISE_GRID_MU = (0.0, 0.1, 0.2)
NOISE_GRID_SIGMA = (0.1, 0.2)


class Settings(BaseSettings):
    """Process-level settings with environment variable overrides."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    out_dir: Path = Field(default_factory=lambda: Path("./out"), alias="FMI_OUT_DIR")
    log_dir: Path = Field(default_factory=lambda: Path("./logs"), alias="FMI_LOG_DIR")
    log_level: str = Field(default="INFO", alias="FMI_LOG_LEVEL")

    # Thread count for frozen-model inference during evaluation
    eval_workers: int = Field(default=1, ge=1, alias="FMI_EVAL_WORKERS")

    # tqdm progress bars for training and unlearning epochs
    progress: bool = Field(default=True, alias="FMI_PROGRESS")


# Global settings instance
settings = Settings()


class StrictModel(BaseModel):
    """Base for config sections: unknown keys are errors."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class DataConfig(StrictModel):
    """Parameters of the synthetic patient/study generator."""

    n_patients: int = Field(default=600, ge=0)
    # P(study_count = 1), P(study_count = 2), ... up to 8 studies per patient
    study_count_probs: List[float] = Field(
        default_factory=lambda: [0.20, 0.15, 0.13, 0.12, 0.11, 0.10, 0.10, 0.09]
    )
    vocab_size: int = Field(default=200, ge=0, le=4000)
    class_prior: Tuple[float, float, float, float] = (0.43, 0.25, 0.22, 0.10)
    image_noise: float = Field(default=0.2, ge=0.0)
    # Weak class evidence, strong patient evidence: fitting train means memorizing patients
    class_signal: float = Field(default=0.05, ge=0.0)
    patient_signal: float = Field(default=0.35, ge=0.0)
    text_class_rate: float = Field(default=0.08, ge=0.0, le=1.0)
    class_word_purity: float = Field(default=0.5, ge=0.0, le=1.0)
    rare_tokens_per_patient: int = Field(default=4, ge=0, le=4)
    # P(a study keeps its patient's label); the rest trade labels at random
    label_persistence: float = Field(default=0.95, ge=0.0, le=1.0)
    train_fraction: float = Field(default=0.85, gt=0.0, lt=1.0)
    seed: int = 0

    @field_validator("study_count_probs")
    @classmethod
    def check_study_counts(cls, v):
        """Probabilities over 1..8 studies must be a distribution."""
        if not 1 <= len(v) <= 8:
            raise ValueError(f"expected 1 to 8 probabilities, got {len(v)}")
        if any(p < 0 for p in v):
            raise ValueError("probabilities must be non-negative")
        if abs(sum(v) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {sum(v)!r}, expected 1")
        return v

    @field_validator("class_prior")
    @classmethod
    def check_prior(cls, v):
        if any(p < 0 for p in v) or abs(sum(v) - 1.0) > 1e-9:
            raise ValueError(f"class prior must be a distribution, got {v}")
        return v


class TrainConfig(StrictModel):
    """Recipe for training the original model (also used by exact retraining)."""

    epochs: int = Field(default=200, ge=0)
    lr: float = Field(default=1e-3, gt=0.0)
    batch_size: int = Field(default=32, ge=1)
    # Early stop once train accuracy reaches target_accuracy and the epoch's mean
    # train loss is at most target_loss, i.e. the train set is memorized
    target_accuracy: float = Field(default=0.995, gt=0.0, le=1.0)
    target_loss: float = Field(default=0.01, ge=0.0)


class NoiseConfig(StrictModel):
    """Perturbation used to build the noisy forget counterparts."""

    mu: float = 0.0
    sigma: float = Field(default=0.1, ge=0.0)
    char_rate: float = Field(default=0.1, ge=0.0, le=1.0)
    word_rate: float = Field(default=0.1, ge=0.0, le=1.0)
    seed: int = 0

    @classmethod
    def none(cls, seed: int = 0) -> "NoiseConfig":
        """The no-noise preset."""
        return cls(mu=0.0, sigma=0.0, char_rate=0.0, word_rate=0.0, seed=seed)

    @property
    def is_identity(self) -> bool:
        return self.mu == 0.0 and self.sigma == 0.0 and self.char_rate == 0.0 and self.word_rate == 0.0


class LossWeights(StrictModel):
    """Coefficients of the four Forget-MI losses; they must sum to 1."""

    w_uu: float = Field(ge=0.0)
    w_ur: float = Field(ge=0.0)
    w_mu: float = Field(ge=0.0)
    w_mr: float = Field(ge=0.0)

    @model_validator(mode="after")
    def check_sum(self):
        total = self.w_uu + self.w_ur + self.w_mu + self.w_mr
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"loss weights sum to {total!r}, expected 1")
        return self

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.w_uu, self.w_ur, self.w_mu, self.w_mr)


# Higher = 0.35 and lower = 0.15 for the emphasized pair
WEIGHT_PRESETS: Dict[str, LossWeights] = {
    "equal": LossWeights(w_uu=0.25, w_ur=0.25, w_mu=0.25, w_mr=0.25),
    "multimodal": LossWeights(w_uu=0.15, w_ur=0.15, w_mu=0.35, w_mr=0.35),
    "unimodal": LossWeights(w_uu=0.35, w_ur=0.35, w_mu=0.15, w_mr=0.15),
    "retention": LossWeights(w_uu=0.15, w_ur=0.35, w_mu=0.15, w_mr=0.35),
}

# "no_noise" is the equal preset paired with the zero NoiseConfig
PresetName = Literal["no_noise", "equal", "multimodal", "unimodal", "retention"]
SETTING_NAMES: Tuple[str, ...] = ("no_noise", "equal", "multimodal", "unimodal", "retention")


def resolve_weights(weights: Union[str, LossWeights]) -> LossWeights:
    """Map a preset name (or explicit weights) to concrete LossWeights."""
    if isinstance(weights, LossWeights):
        return weights
    if weights == "no_noise":
        return WEIGHT_PRESETS["equal"]
    if weights not in WEIGHT_PRESETS:
        raise ConfigError(f"unknown weight preset {weights!r}", "weights")
    return WEIGHT_PRESETS[weights]


def weights_label(weights: Union[str, LossWeights]) -> str:
    """Short label for reports and run directory names."""
    if isinstance(weights, str):
        return weights
    return "w" + "-".join(f"{w:g}" for w in weights.as_tuple())


class UnlearnConfig(StrictModel):
    """Full runtime configuration of one Forget-MI run."""

    epochs: int = Field(default=30, ge=1)
    lr: float = Field(default=1e-4, gt=0.0)
    batch_size: int = Field(default=16, ge=1)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    weights: LossWeights = Field(default_factory=lambda: WEIGHT_PRESETS["equal"])
    clip_norm: float = Field(default=1.0, gt=0.0)
    seed: int = 0


class UnlearnSchedule(StrictModel):
    """The `unlearn` section of an experiment file (noise and weights live at top level)."""

    epochs: int = Field(default=30, ge=1)
    lr: float = Field(default=1e-4, gt=0.0)
    batch_size: int = Field(default=16, ge=1)
    clip_norm: float = Field(default=1.0, gt=0.0)


class BaselineConfig(StrictModel):
    """Settings shared by the comparison unlearners."""

    method: Literal["retrain", "neggrad_plus", "cf_k", "eu_k"] = "neggrad_plus"
    k: int = Field(default=2, ge=0)
    gamma: float = Field(default=1.0, ge=0.0)
    epochs: int = Field(default=30, ge=0)
    lr: float = Field(default=1e-4, gt=0.0)
    batch_size: int = Field(default=16, ge=1)
    clip_norm: float = Field(default=1.0, gt=0.0)
    seed: int = 0


class BaselineSection(StrictModel):
    """The `baseline` section of an experiment file."""

    k: int = Field(default=2, ge=0)
    gamma: float = Field(default=1.0, ge=0.0)


class EvalConfig(StrictModel):
    """Evaluation battery settings."""

    n_bins: int = Field(default=30, ge=1)
    reference_path: Optional[Path] = None


class ExperimentConfig(StrictModel):
    """One reproducible experiment: data, original model, split, unlearning and evaluation."""

    data: DataConfig = Field(default_factory=DataConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    forget_pct: int = 3
    method: Literal["forget-mi", "retrain", "neggrad_plus", "cf_k", "eu_k"] = "forget-mi"
    weights: Union[PresetName, LossWeights] = "equal"
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    unlearn: UnlearnSchedule = Field(default_factory=UnlearnSchedule)
    baseline: BaselineSection = Field(default_factory=BaselineSection)
    evaluation: EvalConfig = Field(default_factory=EvalConfig)
    output_dir: Path = Field(default_factory=lambda: Path("./out/experiment"))
    seed: int = 0

    @field_validator("forget_pct")
    @classmethod
    def check_pct(cls, v):
        if v <= 0 or v >= 100:
            raise ValueError(f"forget_pct must be in (0, 100), got {v}")
        return v

    @model_validator(mode="after")
    def fan_out_seeds(self):
        """Derive stage seeds from the global seed unless set explicitly."""
        if "seed" not in self.data.model_fields_set:
            self.data.seed = derive_seed(self.seed, "data")
        if "seed" not in self.noise.model_fields_set:
            self.noise.seed = derive_seed(self.seed, "noise")
        return self

    def stage_seed(self, stage: str) -> int:
        return derive_seed(self.seed, stage)

    def resolved_noise(self) -> NoiseConfig:
        if self.weights == "no_noise":
            return NoiseConfig.none(seed=self.noise.seed)
        return self.noise

    def unlearn_config(self) -> UnlearnConfig:
        return UnlearnConfig(
            epochs=self.unlearn.epochs,
            lr=self.unlearn.lr,
            batch_size=self.unlearn.batch_size,
            noise=self.resolved_noise(),
            weights=resolve_weights(self.weights),
            clip_norm=self.unlearn.clip_norm,
            seed=self.stage_seed("unlearn"),
        )

    def baseline_config(self) -> BaselineConfig:
        method = self.method if self.method != "forget-mi" else "neggrad_plus"
        return BaselineConfig(
            method=method,
            k=self.baseline.k,
            gamma=self.baseline.gamma,
            epochs=self.unlearn.epochs,
            lr=self.unlearn.lr,
            batch_size=self.unlearn.batch_size,
            clip_norm=self.unlearn.clip_norm,
            seed=self.stage_seed("baseline"),
        )

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form of the validated config."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _field_path(loc) -> str:
    return ".".join(str(part) for part in loc)


def _allowed_keys(loc) -> List[str]:
    """Field names valid at the parent of `loc` in the experiment schema."""
    model = ExperimentConfig
    for part in loc[:-1]:
        field = model.model_fields.get(str(part))
        if field is None or not isinstance(field.annotation, type) or not issubclass(field.annotation, BaseModel):
            return []
        model = field.annotation
    return list(model.model_fields)


def parse_experiment_config(raw: dict) -> ExperimentConfig:
    """
    Validate a decoded config mapping.

    Args:
        raw: Mapping decoded from the JSON config file

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: On the first invalid field, naming its dotted path
    """
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        err = e.errors()[0]
        path = _field_path(err["loc"])
        message = err["msg"]
        if err["type"] == "extra_forbidden":
            suggestion = suggest_key(str(err["loc"][-1]), _allowed_keys(err["loc"]))
            message = "unknown key" + (f" (did you mean {suggestion!r}?)" if suggestion else "")
        raise ConfigError(message, path) from e


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load and validate an experiment config file.

    Args:
        path: JSON config path

    Returns:
        Validated ExperimentConfig
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON at line {e.lineno}: {e.msg}") from e
    config = parse_experiment_config(raw)
    if config.forget_pct not in STANDARD_FORGET_PCTS:
        logger.warning(f"forget_pct={config.forget_pct} is outside the standard grid {STANDARD_FORGET_PCTS}")
    if config.unlearn.lr not in UNLEARN_LEARNING_RATES:
        logger.warning(f"unlearn.lr={config.unlearn.lr} is outside the usual rates {UNLEARN_LEARNING_RATES}")
    logger.info(f"Loaded config {path} (hash {config.config_hash()[:12]})")
    return config
