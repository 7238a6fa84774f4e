int ambientlab_cli_main(int argc, char** argv);
int main(int, char**) { return 0; }
