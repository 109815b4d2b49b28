"""Allow ``python -m wmlab`` as an alias for the ``wmlab`` console script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
