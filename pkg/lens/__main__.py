from lens.main import main

main()
