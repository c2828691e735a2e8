from planetoid_convert.cli import main

raise SystemExit(main())
