from chp_power.cli.main import main

main()
