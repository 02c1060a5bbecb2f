"""
Tunables and process settings.

Solver and pipeline parameters are pydantic models so that CLI flags, JSON
config files and service request bodies are validated the same way. Process
settings (log level, worker count, default seed) come from the environment,
optionally through a .env file.
"""

import logging
import math
import os
import typing as t

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, model_validator

DELTA = math.log(2.0)

# Slack on the (buffer) inequalities; bisection leaves the parameters on the boundary.
BUFFER_SLACK = 1e-12


class SolverOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    tol: float = Field(1e-8, gt=0)
    active_tol: float = Field(1e-6, gt=0)
    max_iters: int = Field(100000, ge=1)
    patience: int = Field(25, ge=1)
    polish_rounds: int = Field(6, ge=1)
    certificate_tol: float = Field(1e-4, gt=0)
    polish_first: bool = True
    seed: int = 0


class PipelineConfig(BaseModel):
    """
    Parameters of the global construction. epsilon0 bounds the patch balls,
    epsilon is the net sparsity, R the within-bin separation.
    """

    model_config = ConfigDict(frozen=True)

    C: float = Field(gt=0, lt=1)
    c_star: float = Field(gt=0, lt=1)
    epsilon0: float = Field(gt=0)
    epsilon: float = Field(gt=0)
    R: float = Field(gt=1)
    delta: float = DELTA
    solver: SolverOptions = SolverOptions()
    seed: int = 0
    sample_size: int = Field(300, ge=1)
    sample_radius: float = Field(3.0, gt=0)
    patch_samples: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)

    @model_validator(mode='after')
    def check_buffers(self) -> 'PipelineConfig':
        if not self.epsilon < self.epsilon0:
            raise ValueError(f'epsilon={self.epsilon} must be below epsilon0={self.epsilon0}')
        if not self.R > self.epsilon:
            raise ValueError(f'R={self.R} must exceed epsilon={self.epsilon}')
        if self.buffer_a > 1.0 + BUFFER_SLACK:
            raise ValueError(f'(buffer).a violated: {self.buffer_a:.12g} > 1')
        if self.buffer_b > 1.0 + BUFFER_SLACK:
            raise ValueError(f'(buffer).b violated: {self.buffer_b:.12g} > 1')
        return self

    @property
    def buffer_a(self) -> float:
        ratio = self.epsilon / self.epsilon0
        return (self.c_star + ratio) / (1.0 - ratio)

    @property
    def buffer_b(self) -> float:
        ratio = 2.0 * self.epsilon / self.R
        return ((self.c_star + self.delta / self.R) + ratio) / (1.0 - ratio)

    @property
    def sqrt_c_star(self) -> float:
        return math.sqrt(self.c_star)


class Settings(BaseModel):
    log_level: str = 'WARNING'
    workers: int = Field(1, ge=1)
    seed: int = 0
    port: int = 8320

    @classmethod
    def from_env(cls, dotenv: bool = True) -> 'Settings':
        if dotenv:
            load_dotenv()
        return cls(
            log_level=os.getenv('HYPEXT_LOG_LEVEL', 'WARNING').upper(),
            workers=int(os.getenv('HYPEXT_WORKERS', '1')),
            seed=int(os.getenv('HYPEXT_SEED', '0')),
            port=int(os.getenv('PORT', '8320')),
        )


def configure_logging(settings: t.Optional[Settings] = None) -> Settings:
    settings = settings or Settings.from_env()
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.WARNING),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    return settings
