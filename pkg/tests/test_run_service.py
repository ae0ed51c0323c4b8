"""Tests for the run ledger."""

from lens.database import RunStatus
from lens.services.run_service import RunService


def test_status_from_exit_code():
    assert RunStatus.from_exit_code(0) is RunStatus.PASSED
    assert RunStatus.from_exit_code(1) is RunStatus.FAILED
    assert RunStatus.from_exit_code(2) is RunStatus.REJECTED


def test_record_and_list():
    record = RunService.record_run("pe check", 1, seed=11, manifest="subcommand=pe check\n")
    assert record is not None
    assert record.status is RunStatus.FAILED
    assert record.created_at is not None

    latest = RunService.list_runs(limit=1)
    assert len(latest) == 1
    assert latest[0].id == record.id
    assert latest[0].seed == 11
    assert latest[0].manifest == "subcommand=pe check\n"


def test_list_runs_newest_first():
    first = RunService.record_run("fsa run", 0)
    second = RunService.record_run("fsa seq", 2)
    ids = [r.id for r in RunService.list_runs(limit=2)]
    assert ids == [second.id, first.id]
    assert RunService.list_runs(limit=2)[0].status is RunStatus.REJECTED
