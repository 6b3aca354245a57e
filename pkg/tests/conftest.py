"""Shared fixtures."""

import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

import mppsim.models  # noqa: F401
from mppsim.database import Base
from mppsim.schemas.codec import CodecParams
from mppsim.schemas.experiment import ExperimentConfig
from mppsim.schemas.noise import NoiseConfig


@pytest.fixture
def desk_params() -> CodecParams:
    """Small codec whose 2^16 messages the exhaustive oracle can enumerate."""
    return CodecParams(message_bits=16, checksum_bits=8, packet_slots=256)


@pytest.fixture
def tiny_params() -> CodecParams:
    return CodecParams(message_bits=10, checksum_bits=5, packet_slots=64)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def quiet_config() -> ExperimentConfig:
    """Noiseless channel, two payload words, a handful of repetitions."""
    return ExperimentConfig(
        payloads=["Hello1!\n", "Hello2!\n"],
        noise=NoiseConfig(),
        snr_grid_db=[16.0],
        modes=["dual"],
        repetitions=3,
        probe_messages=1,
        guard_slots=4,
        rms_window_s=0.001,
        rms_traces=1,
    )


@pytest.fixture
def db_session():
    """In-memory results store, fresh for each test."""
    engine = create_engine("sqlite:///:memory:")
    Base.metadata.create_all(bind=engine)
    session = sessionmaker(autocommit=False, autoflush=False, bind=engine)()
    try:
        yield session
    finally:
        session.close()
        engine.dispose()
