"""Entry point of the DSM registration command-line tool."""

import sys

from dotenv import load_dotenv

from src.infrastructure.adapters.inbound.cli.app import run


def main() -> int:
    load_dotenv()
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
