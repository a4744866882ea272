from lhvlab.cli import main
import sys

sys.exit(main())
