import sys

from mbrdep.cli import main

sys.exit(main())
