import sys

from loglshd.cli import main

sys.exit(main())
