import sys

from promisekit.main import main

sys.exit(main())
