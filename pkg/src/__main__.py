import sys

from src.jobs.cli import main

sys.exit(main())
