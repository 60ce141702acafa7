import sys

from mvsbm.cli import main

sys.exit(main())
