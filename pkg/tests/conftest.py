"""Shared models and quadrature settings."""

import json
from pathlib import Path

import pytest

from TVAR_Rate_Distortion.model.tvar_model import TvarModel
from TVAR_Rate_Distortion.rate_distortion.quadrature import QuadConfig


@pytest.fixture
def white_noise() -> TvarModel:
    return TvarModel(order=0, coeffs=(), noise_variance=1.0, name="white_noise")


@pytest.fixture
def ar1() -> TvarModel:
    return TvarModel(order=1, coeffs=((-0.9,),), noise_variance=1.0, name="ar1")


@pytest.fixture
def tvar_affine() -> TvarModel:
    return TvarModel(order=1, coeffs=((-0.5, -0.4),), noise_variance=1.0, name="tvar_affine")


@pytest.fixture
def tvar_linear() -> TvarModel:
    return TvarModel(order=1, coeffs=((0.0, -0.9),), noise_variance=1.0, name="tvar_linear")


@pytest.fixture
def tvar2() -> TvarModel:
    return TvarModel(order=2, coeffs=((-0.6, 0.3, -0.1), (0.2, -0.15)), noise_variance=0.5, name="tvar2")


@pytest.fixture
def tvar3() -> TvarModel:
    return TvarModel(order=3, coeffs=((-0.4, 0.2), (0.1,), (-0.05, 0.1)), noise_variance=2.0, name="tvar3")


@pytest.fixture
def quad() -> QuadConfig:
    return QuadConfig()


@pytest.fixture
def model_file(tmp_path):
    """Write a model dictionary to ``tmp_path`` and return its path."""

    def write(data: dict, name: str = "model.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write
