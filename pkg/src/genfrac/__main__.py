import sys

from genfrac.cli import main

sys.exit(main())
