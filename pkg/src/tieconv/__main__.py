import sys

from tieconv.cli import main

sys.exit(main())
