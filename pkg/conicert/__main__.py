import sys

from conicert.cli import main

sys.exit(main())
