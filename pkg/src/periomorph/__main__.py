from periomorph.cli import main
import sys

sys.exit(main())
