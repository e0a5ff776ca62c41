"""
Unit tests for command-line error reporting.
"""

import json
from pathlib import Path

import pytest

from src.domain.exceptions import (
    DisconnectedGraphError,
    InvalidConfigurationError,
    NoInliersError,
    NoOverlapError,
    NotEnoughDsmsError,
    ParseError,
    RasterIOError,
)
from src.infrastructure.adapters.inbound.cli.exception_handlers import (
    EXIT_GRAPH_FAILURE,
    EXIT_INPUT_ERROR,
    EXIT_REGISTRATION_FAILURE,
    error_payload,
    exit_code_for,
    handle_cli_exception,
    write_error_file,
)


@pytest.mark.unit
@pytest.mark.error_handling
class TestExitCodes:
    """Error classes map onto the three failure codes."""

    @pytest.mark.parametrize(
        "error, expected",
        [
            (ParseError("a.asc", "bad header", line=2), EXIT_INPUT_ERROR),
            (RasterIOError("a.asc", "read"), EXIT_INPUT_ERROR),
            (InvalidConfigurationError("bad tau"), EXIT_INPUT_ERROR),
            (NoOverlapError(), EXIT_REGISTRATION_FAILURE),
            (NoInliersError(1.0, 2), EXIT_REGISTRATION_FAILURE),
            (DisconnectedGraphError([[0], [1]]), EXIT_GRAPH_FAILURE),
            (NotEnoughDsmsError(1), EXIT_GRAPH_FAILURE),
            (RuntimeError("boom"), EXIT_INPUT_ERROR),
        ],
    )
    def test_exit_code_for(self, error: Exception, expected: int) -> None:
        assert exit_code_for(error) == expected


@pytest.mark.unit
@pytest.mark.error_handling
class TestErrorFile:
    """error.json contents."""

    def test_domain_payload(self) -> None:
        payload = error_payload(DisconnectedGraphError([[0, 1], [2]]))

        assert payload["error"]["code"] == "DISCONNECTED_GRAPH"
        assert payload["error"]["context"]["components"] == [[0, 1], [2]]

    def test_unexpected_payload(self) -> None:
        payload = error_payload(KeyError("tile"))

        assert payload["error"]["code"] == "UNEXPECTED_ERROR"
        assert payload["error"]["context"] == {"exception_type": "KeyError"}

    def test_write_creates_directory(self, tmp_path: Path) -> None:
        path = write_error_file(NoOverlapError(), tmp_path / "nested")

        assert path == tmp_path / "nested" / "error.json"
        assert json.loads(path.read_text(encoding="utf-8"))["error"]["code"] == "NO_OVERLAP"

    def test_no_directory_no_file(self) -> None:
        assert write_error_file(NoOverlapError(), None) is None

    def test_handle_reports_on_stderr(self, tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
        code = handle_cli_exception(NotEnoughDsmsError(1), tmp_path)

        assert code == EXIT_GRAPH_FAILURE
        assert (tmp_path / "error.json").is_file()
        assert capsys.readouterr().err.startswith("error: ")
