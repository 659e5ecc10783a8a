"""
Pipeline configuration for the canal surface toolkit

Settings come from keyword overrides first, then environment variables,
then the defaults below.

Environment variables:
- CANAL_SEED: seed for randomized fiber sampling (default: 20240607)
- CANAL_DETERMINANT_KERNEL: "expansion" or "bareiss" (default: expansion)
- CANAL_SAMPLE_ATTEMPTS: maximum fiber samples (default: 10)
- CANAL_LOG_LEVEL: logging level name (default: INFO)
"""

import os
import logging
from dataclasses import dataclass, asdict
from typing import Any, Dict

from error_utils import InputError
from exactalg import DETERMINANT_KERNELS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    """Configuration shared by the elimination pipeline"""
    seed: int = 20240607
    determinant_kernel: str = "expansion"
    sample_attempts: int = 10
    sample_agreement: int = 3
    log_level: str = "INFO"

    def validate(self):
        """Validate the configuration values"""
        if self.determinant_kernel not in DETERMINANT_KERNELS:
            raise InputError(
                f"Unknown determinant kernel: {self.determinant_kernel}",
                {'allowed': list(DETERMINANT_KERNELS)}
            )
        if self.sample_agreement < 1:
            raise InputError("sample_agreement must be positive")
        if self.sample_attempts < self.sample_agreement:
            raise InputError(
                "sample_attempts must be at least sample_agreement",
                {'sample_attempts': self.sample_attempts, 'sample_agreement': self.sample_agreement}
            )
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{name} must be an integer, got {raw!r}", {'variable': name})


def create_pipeline_config(**overrides) -> PipelineConfig:
    """
    Create a pipeline configuration from environment variables.

    Args:
        **overrides: explicit values that take precedence over the environment

    Returns:
        Validated PipelineConfig instance

    Raises:
        InputError: if a value is malformed
    """
    values = {
        'seed': _env_int('CANAL_SEED', PipelineConfig.seed),
        'determinant_kernel': os.environ.get('CANAL_DETERMINANT_KERNEL', PipelineConfig.determinant_kernel),
        'sample_attempts': _env_int('CANAL_SAMPLE_ATTEMPTS', PipelineConfig.sample_attempts),
        'log_level': os.environ.get('CANAL_LOG_LEVEL', PipelineConfig.log_level),
    }
    values.update({key: value for key, value in overrides.items() if value is not None})

    config = PipelineConfig(**values).validate()
    logger.debug(f"Pipeline configuration: {config.to_dict()}")
    return config
