import sys

from sessio.cli import main

sys.exit(main())
