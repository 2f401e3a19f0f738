import sys

from mixme.cli import main

sys.exit(main())
