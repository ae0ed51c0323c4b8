"""
Database Models
SQLAlchemy ORM model for the run ledger.
"""

from datetime import datetime
from enum import Enum

import pytz
from sqlalchemy import Column, DateTime, Integer, String, Text, Enum as SQLEnum
from sqlalchemy.orm import declarative_base

Base = declarative_base()


def utc_now() -> datetime:
    return datetime.now(pytz.utc)


class RunStatus(str, Enum):
    """Outcome of a dispatched run, mirroring its exit status"""
    PASSED = "passed"
    FAILED = "failed"
    REJECTED = "rejected"

    @classmethod
    def from_exit_code(cls, code: int) -> "RunStatus":
        return {0: cls.PASSED, 1: cls.FAILED}.get(code, cls.REJECTED)


class RunRecord(Base):
    """RunRecord model - one dispatched subcommand"""
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, autoincrement=True)
    subcommand = Column(String(64), nullable=False)
    seed = Column(Integer, nullable=True)
    exit_code = Column(Integer, nullable=False)
    status = Column(SQLEnum(RunStatus), nullable=False)
    manifest = Column(Text, nullable=True)  # key=value lines, as written next to the outputs
    created_at = Column(DateTime(timezone=True), default=utc_now)

    def __repr__(self):
        return f"<RunRecord(id={self.id}, subcommand='{self.subcommand}', status={self.status})>"
