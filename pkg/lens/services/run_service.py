"""
Run Service
Records dispatched runs in the SQLite ledger.
"""

from typing import List, Optional

from lens.config import RUN_LEDGER_ENABLED, logger
from lens.database import RunRecord, RunStatus, get_session, init_db

_initialized = False


def _ensure_tables() -> None:
    global _initialized
    if not _initialized:
        init_db()
        _initialized = True


class RunService:
    """Service for the run ledger; never raises into a verification run"""

    @staticmethod
    def record_run(
        subcommand: str,
        exit_code: int,
        seed: Optional[int] = None,
        manifest: Optional[str] = None,
    ) -> Optional[RunRecord]:
        """
        Store one dispatched run.

        Args:
            subcommand: Full subcommand name, e.g. "invariance perm"
            exit_code: Exit status returned to the shell
            seed: Seed used, if any
            manifest: Manifest text written alongside the outputs

        Returns:
            Created RunRecord or None if disabled or failed
        """
        if not RUN_LEDGER_ENABLED:
            return None
        try:
            _ensure_tables()
            with get_session() as session:
                record = RunRecord(
                    subcommand=subcommand,
                    seed=seed,
                    exit_code=exit_code,
                    status=RunStatus.from_exit_code(exit_code),
                    manifest=manifest,
                )
                session.add(record)
                session.commit()
                session.refresh(record)
                logger.debug(f"Recorded run {record.id} ({subcommand}, exit {exit_code})")
                return record
        except Exception as e:
            logger.error(f"Error recording run: {e}")
            return None

    @staticmethod
    def list_runs(limit: int = 20) -> List[RunRecord]:
        """
        Most recent runs first.

        Args:
            limit: Maximum number of records

        Returns:
            List of RunRecord (empty if disabled or failed)
        """
        if not RUN_LEDGER_ENABLED:
            return []
        try:
            _ensure_tables()
            with get_session() as session:
                return (
                    session.query(RunRecord)
                    .order_by(RunRecord.id.desc())
                    .limit(limit)
                    .all()
                )
        except Exception as e:
            logger.error(f"Error listing runs: {e}")
            return []
