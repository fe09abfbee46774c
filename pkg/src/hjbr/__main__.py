import sys

from hjbr.cli import main

sys.exit(main())
