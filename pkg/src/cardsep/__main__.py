import sys

from cardsep.cli import main

sys.exit(main())
