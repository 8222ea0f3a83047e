#!/usr/bin/env python3
"""fidesp command dispatcher.

Every public module in cli/ that defines ``main(argv) -> int`` is a
subcommand; ``cli/table1.py`` is ``fidesp table1``. Underscored modules
hold shared helpers.
"""

import ast
import importlib
import sys
from pathlib import Path

CLI_DIR = Path(__file__).resolve().parent
PROG = "fidesp"


def _discover_commands() -> dict[str, Path]:
    """Map subcommand name to source file."""
    return {
        path.stem.replace("_", "-"): path
        for path in sorted(CLI_DIR.glob("*.py"))
        if not path.name.startswith("_") and path.stem != PROG
    }


def _summary(path: Path) -> str:
    try:
        doc = ast.get_docstring(ast.parse(path.read_text()))
    except (OSError, SyntaxError):
        return ""
    return doc.strip().splitlines()[0] if doc else ""


def _print_usage(commands: dict[str, Path], stream=None) -> None:
    stream = stream or sys.stdout
    print(f"usage: {PROG} <command> [config.json] [options ...]\n", file=stream)
    print("Available commands:", file=stream)
    for name, path in commands.items():
        print(f"  {name:10s} {_summary(path)}", file=stream)
    print(f"\nRun '{PROG} <command> --help' for the options of a command.", file=stream)


def main() -> None:
    commands = _discover_commands()
    args = sys.argv[1:]

    if not args:
        _print_usage(commands)
        sys.exit(2)
    if args[0] in ("-h", "--help"):
        _print_usage(commands)
        sys.exit(0)

    name = args[0].replace("_", "-")
    if name not in commands:
        print(f"{PROG}: unknown command '{args[0]}'\n", file=sys.stderr)
        _print_usage(commands, sys.stderr)
        sys.exit(2)

    module = importlib.import_module(f"cli.{commands[name].stem}")
    sys.exit(module.main(args[1:]))


if __name__ == "__main__":
    main()
