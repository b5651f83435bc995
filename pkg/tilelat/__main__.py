import sys

from tilelat.cli.main import main

sys.exit(main())
