import sys

from usgesture.cli import main

sys.exit(main())
