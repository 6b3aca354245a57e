"""
Results-store connection and session management using SQLAlchemy 2.0.

This module sets up the engine, session factory, and the Base class for
ORM models. Experiment runs are persisted here when
``settings.persist_runs`` is enabled.
"""

from contextlib import contextmanager
from typing import Iterator

from sqlalchemy import create_engine
from sqlalchemy.orm import DeclarativeBase, Session, sessionmaker

from mppsim.config import settings


# Create SQLAlchemy engine
engine = create_engine(
    settings.results_database_url,
    echo=settings.debug,  # Log SQL queries when debug mode is enabled
)

# Create session factory
# autocommit=False: Don't automatically commit after each operation
# autoflush=False: Don't automatically flush before queries
SessionLocal = sessionmaker(
    autocommit=False,
    autoflush=False,
    bind=engine,
)


# Base class for all ORM models
class Base(DeclarativeBase):
    """
    Base class for all SQLAlchemy ORM models.

    All models should inherit from this class to be properly
    registered with SQLAlchemy's declarative system.
    """
    pass


def init_db() -> None:
    """
    Create all tables on the configured engine.

    Alembic owns the schema for long-lived stores; this is for
    throwaway SQLite files created by a one-off run.
    """
    import mppsim.models  # noqa: F401  (registers the tables)

    Base.metadata.create_all(bind=engine)


@contextmanager
def get_db() -> Iterator[Session]:
    """
    Provide a results-store session and close it afterwards.

    Usage in command handlers:
        with get_db() as db:
            create_run(db, ...)

    Yields:
        Session: SQLAlchemy database session
    """
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
