import sys

from hiercoll.cli import main

sys.exit(main())
