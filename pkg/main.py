"""
Entry point for the limiar command-line interface (CLI).

Running this file directly behaves like the installed ``limiar`` command.
"""

import sys

from limiar.cli import main

if __name__ == "__main__":
    sys.exit(main())
