from abrsim.cli import main

raise SystemExit(main())
