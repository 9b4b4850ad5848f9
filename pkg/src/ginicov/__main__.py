import sys
from ginicov.cli import main

sys.exit(main())
