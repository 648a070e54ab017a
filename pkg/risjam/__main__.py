import sys

from risjam.cli import main

sys.exit(main())
