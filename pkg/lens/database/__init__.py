"""
Database Package
SQLAlchemy model and session management for the run ledger.
"""

from lens.database.database import init_db, get_session, Session
from lens.database.models import RunRecord, RunStatus

__all__ = [
    'init_db',
    'get_session',
    'Session',
    'RunRecord',
    'RunStatus',
]
