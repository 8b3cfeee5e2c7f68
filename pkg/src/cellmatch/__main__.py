import sys

from cellmatch.cli import main

sys.exit(main())
