import sys

from src.app.command_line import main as command_line_main


def main() -> None:
    # Run from the repository root, e.g. python -m scripts.running_lab run --scenario figure4
    sys.exit(command_line_main())


if __name__ == "__main__":
    main()
