import sys

from recest.cli import main

sys.exit(main())
