import sys

from chiralwalk.cli import main

sys.exit(main())
