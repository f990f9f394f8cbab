import sys

from vvorder.cli import main

sys.exit(main())
