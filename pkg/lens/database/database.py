"""
Run Ledger Storage
SQLAlchemy engine and sessions over the SQLite file named by LENS_DATABASE_PATH.
"""

from contextlib import contextmanager
from typing import Iterator

from sqlalchemy import create_engine, inspect
from sqlalchemy.orm import sessionmaker, Session as SQLAlchemySession

from lens.config import DATABASE_PATH, logger
from lens.database.models import Base, RunRecord

LEDGER_URL = f"sqlite:///{DATABASE_PATH}"

# Handlers may record from worker threads
engine = create_engine(LEDGER_URL, echo=False, connect_args={"check_same_thread": False})

# Records are read after their session closes (runs list)
SessionLocal = sessionmaker(bind=engine, autoflush=False, expire_on_commit=False)

Session = SQLAlchemySession


def init_db() -> None:
    """Create the runs table if the ledger file does not have it yet."""
    try:
        existed = inspect(engine).has_table(RunRecord.__tablename__)
        Base.metadata.create_all(bind=engine)
        if not existed:
            logger.info(f"Created run ledger at {DATABASE_PATH}")
    except Exception as e:
        logger.error(f"Error initializing run ledger at {DATABASE_PATH}: {e}")
        raise


@contextmanager
def get_session() -> Iterator[SQLAlchemySession]:
    """
    Session that commits on success and rolls back on error.

    Usage:
        with get_session() as session:
            latest = session.query(RunRecord).order_by(RunRecord.id.desc()).first()
    """
    session = SessionLocal()
    try:
        yield session
        session.commit()
    except Exception as e:
        session.rollback()
        logger.error(f"Run ledger error: {e}")
        raise
    finally:
        session.close()
