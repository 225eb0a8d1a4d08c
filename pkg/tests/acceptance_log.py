"""Collects acceptance result lines for the terminal summary."""

LINES: list[str] = []


def record(line: str) -> None:
    LINES.append(line)
