import sys

from autocam_sim.main import main

sys.exit(main())
