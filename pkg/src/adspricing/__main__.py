import sys

from adspricing.cli import main

sys.exit(main())
