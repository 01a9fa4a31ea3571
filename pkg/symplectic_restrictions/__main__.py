import sys

from symplectic_restrictions.cli import main

sys.exit(main())
