"""Entry point for python -m atloss."""

from atloss.cli import main

if __name__ == "__main__":
    main()
