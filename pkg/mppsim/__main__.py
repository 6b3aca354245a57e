import sys

from mppsim.main import main

sys.exit(main())
