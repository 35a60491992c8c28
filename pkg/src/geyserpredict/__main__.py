import sys

from geyserpredict.cli import main

sys.exit(main())
