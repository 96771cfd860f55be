import sys

from whataboutism.cli import main

sys.exit(main())
